import json
import logging
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import pandas as pd
from jinja2 import Environment, FileSystemLoader, StrictUndefined

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import backend
from backend.models.records import RunMetadata
from backend.services.config_manager import ConfigManager

logger = logging.getLogger(__name__)

GNUPLOT_TEMPLATE = "figure.gp.j2"


# Class: ReportService
class ReportService:
    """Writes result tables (CSV), reports (JSON) and gnuplot scripts for a run"""

    # Function: __init__
    def __init__(self, config: ConfigManager, output_dir: Optional[Path] = None):
        self.config = config
        self.output_dir = Path(output_dir or config.get("output.directory", "results"))
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.float_format = config.get("output.float_format", "%.10e")
        template_dir = Path(config.get("output.template_dir", "templates"))
        if not template_dir.is_absolute():
            template_dir = project_root / template_dir
        self.template_env = Environment(
            loader=FileSystemLoader(str(template_dir)),
            undefined=StrictUndefined,
            keep_trailing_newline=True,
        )

    # Function: metadata
    def metadata(self, command: str, notes: Iterable[str] = ()) -> RunMetadata:
        return RunMetadata(
            command=command,
            config_hash=self.config.hash(),
            version=backend.__version__,
            notes=list(notes),
        )

    # Function: write_csv
    def write_csv(
        self,
        frame: pd.DataFrame,
        name: str,
        metadata: RunMetadata,
        columns: Optional[Sequence[str]] = None,
    ) -> Path:
        """
        Write a table with '#' provenance lines ahead of the header row

        Args:
            columns: fixed column order; defaults to the frame's own order

        Returns:
            path of the CSV file
        """
        path = self.output_dir / f"{name}.csv"
        table = frame if columns is None else frame.reindex(columns=list(columns))
        header = metadata.header_lines()
        header.append(f"# columns: {', '.join(str(c) for c in table.columns)}")
        with open(path, "w", newline="") as f:
            f.write("\n".join(header) + "\n")
            table.to_csv(f, index=False, float_format=self.float_format, lineterminator="\n")
        logger.info("wrote %s (%d rows)", path, len(table))
        return path

    # Function: write_json
    def write_json(self, payload, name: str, metadata: RunMetadata) -> Path:
        """Payload (dict, list or pydantic model) wrapped with the run metadata."""
        path = self.output_dir / f"{name}.json"
        if hasattr(payload, "model_dump"):
            payload = payload.model_dump(mode="json")
        document = {"metadata": metadata.model_dump(mode="json"), "result": payload}
        with open(path, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True, default=_json_default)
            f.write("\n")
        logger.info("wrote %s", path)
        return path

    # Function: write_gnuplot
    def write_gnuplot(
        self,
        name: str,
        x_column: str,
        series: Sequence[Dict[str, str]],
        title: str,
        xlabel: str,
        ylabel: str,
        logx: bool = False,
        logy: bool = True,
    ) -> Path:
        """
        Render a plotting script for `<name>.csv`

        Args:
            series: one {"column": ..., "label": ...} entry per curve
        """
        path = self.output_dir / f"{name}.gp"
        template = self.template_env.get_template(GNUPLOT_TEMPLATE)
        text = template.render(
            data_file=f"{name}.csv",
            output_file=f"{name}.png",
            title=title,
            xlabel=xlabel,
            ylabel=ylabel,
            logx=logx,
            logy=logy,
            x_column=x_column,
            series=list(series),
        )
        path.write_text(text)
        logger.info("wrote %s", path)
        return path

    # Function: format_table
    @staticmethod
    def format_table(frame: pd.DataFrame, columns: Optional[List[str]] = None) -> str:
        """Plain-text table for the terminal."""
        table = frame if columns is None else frame[columns]
        return table.to_string(index=False, float_format=lambda v: f"{v:.4g}")


# Function: _json_default
def _json_default(value):
    # numpy scalars and arrays
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"not JSON serializable: {type(value).__name__}")
