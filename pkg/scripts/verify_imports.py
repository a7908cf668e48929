import importlib
import sys
from pathlib import Path
from typing import List, Optional, Tuple

# third-party packages the simulator needs at run time
DEPENDENCIES = ["numpy", "scipy", "pandas", "pydantic", "yaml", "dotenv", "jinja2"]

MODULES: List[Tuple[str, Optional[str]]] = [
    ("backend.main", "main"),
    ("backend.commands", "run_guarded"),
    ("backend.services.config_manager", "ConfigManager"),
    ("backend.services.experiment_service", "ExperimentService"),
    ("backend.services.figure_service", "FigureService"),
    ("backend.services.report_service", "ReportService"),
    ("backend.services.validation_service", "ValidationService"),
    ("physics_models.units", "PhysicalSetup"),
    ("physics_models.analytic", "chi_two_pi"),
    ("physics_models.kspace", "propagate_two_level"),
    ("physics_models.vibrational", "simulate_gate"),
    ("pulse_processing", "search_adiabatic_params"),
]


# Function: add_project_root_to_path
def add_project_root_to_path() -> Path:
    project_root = Path(__file__).resolve().parent.parent
    sys.path.insert(0, str(project_root))
    return project_root


# Function: check_import
def check_import(module_path: str, attr: Optional[str] = None) -> Tuple[bool, str]:
    """Import a module and optionally confirm one attribute exists.

    Returns a tuple (ok: bool, message: str).
    """
    try:
        module = importlib.import_module(module_path)
    except Exception as exc:
        return False, f"IMPORT FAILED: {module_path} -> {exc!r}"

    if attr and not hasattr(module, attr):
        return False, f"MISSING ATTR: {module_path}.{attr}"
    version = getattr(module, "__version__", "")
    return True, f"OK: {module_path}{'.' + attr if attr else ''} {version}".rstrip()


# Function: print_summary
def print_summary(results: List[Tuple[str, bool, str]]):
    passed = sum(1 for _, ok, _ in results if ok)

    print("\nImport Verification Summary")
    print("---------------------------")
    for label, ok, msg in results:
        mark = "[OK]" if ok else "[FAIL]"
        print(f"{mark} {label}: {msg}")

    print(f"\nPassed {passed} of {len(results)}")


# Function: main
def main():
    project_root = add_project_root_to_path()
    print(f"Project root: {project_root}")

    results: List[Tuple[str, bool, str]] = []
    for name in DEPENDENCIES:
        ok, msg = check_import(name)
        results.append((f"dep:{name}", ok, msg))
    for module_path, attr in MODULES:
        ok, msg = check_import(module_path, attr)
        results.append((module_path, ok, msg))

    print_summary(results)
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)


if __name__ == "__main__":
    main()
