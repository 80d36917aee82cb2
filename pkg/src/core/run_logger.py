import json
import os
import threading
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional


# 1. Record structures
@dataclass
class RunEvent:
    t: float   # simulation time, seconds
    type: str  # PERTURBATION_ON, PERTURBATION_OFF, SINGULAR_TASK, DIVERGED, UNREACHED_TARGET
    payload: Dict[str, Any]


@dataclass
class RunLogData:
    run_id: str
    scenario: str
    scenario_hash: str
    variant: str
    events: List[RunEvent] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    runtime_s: Optional[float] = None


# 2. The logger
class RunLogger:
    """
    Collects the events of one simulation run and writes them as a JSON metrics document.

    Args:
        run_id: identifier of the run (scenario name + variant)
        scenario: scenario name
        scenario_hash: content hash of the scenario, for provenance
        variant: observer variant of the run
        filepath: where to write; None keeps everything in memory
    """

    def __init__(self, run_id: str, scenario: str, scenario_hash: str, variant: str, filepath: Optional[str] = None):
        self.lock = threading.Lock()
        self.filepath = filepath
        self.data = RunLogData(run_id=run_id, scenario=scenario, scenario_hash=scenario_hash, variant=variant)
        if self.filepath:
            os.makedirs(os.path.dirname(os.path.abspath(self.filepath)), exist_ok=True)
            self._flush()

    def _flush(self):
        """Write to disk. Always called under lock."""
        if not self.filepath:
            return
        with open(self.filepath, "w", encoding="utf-8") as f:
            json.dump(asdict(self.data), f, indent=2, sort_keys=True)
            f.write("\n")

    def log_event(self, t: float, event_type: str, payload: Dict[str, Any]):
        with self.lock:
            self.data.events.append(RunEvent(t=round(t, 9), type=event_type, payload=payload))
            self._flush()

    def events_of(self, event_type: str) -> List[RunEvent]:
        with self.lock:
            return [e for e in self.data.events if e.type == event_type]

    def finish(self, summary: Dict[str, Any], runtime_s: Optional[float] = None):
        with self.lock:
            self.data.summary = summary
            self.data.runtime_s = None if runtime_s is None else round(runtime_s, 3)
            self._flush()

    def save_to(self, filepath: str):
        with self.lock:
            self.filepath = filepath
            os.makedirs(os.path.dirname(os.path.abspath(filepath)), exist_ok=True)
            self._flush()
