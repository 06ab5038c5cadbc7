import logging
import json
import sys
import pandas as pd
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from config.config import Config
from src.groups import TapeGraph
from src.machine import RunTrace, write_trace


class RunLogger:
    """
    Logging setup plus on-disk artifacts for CLI runs: traces (TSV),
    verdict reports (JSONL) and result tables (CSV), all under the log directory.
    """

    def __init__(self, config: Optional[Config] = None, quiet: bool = False):
        self.config = config or Config()
        self.logs_dir = Path(self.config.LOG_DIR)
        self.quiet = quiet
        self.setup_logging()

    def setup_logging(self):
        """Set up logging system"""
        self.logs_dir.mkdir(parents=True, exist_ok=True)

        stream = logging.StreamHandler(sys.stderr)
        stream.setLevel(logging.WARNING if self.quiet else self.config.LOG_LEVEL)

        logging.basicConfig(
            level=self.config.LOG_LEVEL,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=[
                logging.FileHandler(self.logs_dir / 'cayley_tape.log'),
                stream
            ],
            force=True
        )
        self.logger = logging.getLogger(__name__)

    def log_trace(self, trace: RunTrace, graph: TapeGraph, path: Optional[Path] = None,
                  fmt: str = 'tsv', show: Callable[[Any], str] = str) -> Path:
        """Write a run trace (step, state, head, read, write, move); TSV unless fmt is json"""
        target = Path(path) if path else self.logs_dir / f'trace.{fmt}'
        write_trace(trace, graph, target, fmt, show)
        self.logger.info(f"Trace with {len(trace)} steps written to {target}")
        return target

    def log_report(self, command: str, report: Dict):
        """Append a verdict to reports.jsonl"""
        entry = {
            'timestamp': datetime.now().isoformat(),
            'command': command,
            **report
        }

        try:
            with open(self.logs_dir / 'reports.jsonl', 'a', encoding='utf-8') as f:
                f.write(json.dumps(entry, default=str, ensure_ascii=False) + '\n')
        except OSError as e:
            self.logger.error(f"Failed to log report: {e}")

    def save_table(self, name: str, records: List[Dict]) -> Path:
        """Save tabular results (schedules, bisimulation summaries) as CSV"""
        target = self.logs_dir / f'{name}.csv'
        pd.DataFrame(records).to_csv(target, index=False)
        self.logger.debug(f"Saved {len(records)} rows to {target}")
        return target
