"""Protocol trace: line records (time_us, entity, event, subcarrier, detail).

The detail column is a semicolon-joined key=value list. Traces are written as
CSV with a fixed header so reruns with one seed are byte-identical.
"""
from __future__ import annotations

from dataclasses import dataclass

HEADER = "time_us,entity,event,subcarrier,detail"


@dataclass(frozen=True)
class TraceRecord:
    time_us: int
    entity: str
    event: str
    subcarrier: int
    detail: str = ""

    def line(self) -> str:
        return f"{self.time_us},{self.entity},{self.event},{self.subcarrier},{self.detail}"


class Trace:
    def __init__(self):
        self.records: list[TraceRecord] = []

    def log(self, time_us: int, entity: str, event: str, subcarrier: int = 0, **detail):
        parts = ";".join(f"{k}={v}" for k, v in detail.items())
        self.records.append(TraceRecord(int(time_us), entity, event, int(subcarrier), parts))

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(HEADER + "\n")
            for rec in self.records:
                fh.write(rec.line() + "\n")

    def events(self, kind=None, entity=None):
        out = self.records
        if kind is not None:
            out = [r for r in out if r.event == kind]
        if entity is not None:
            out = [r for r in out if r.entity == entity]
        return out


def parse_detail(detail: str) -> dict:
    out = {}
    if detail:
        for part in detail.split(";"):
            k, _, v = part.partition("=")
            out[k] = v
    return out


def load_trace(path) -> Trace:
    tr = Trace()
    with open(path) as fh:
        fh.readline()  # header
        for line in fh:
            t, entity, event, sub, detail = line.rstrip("\n").split(",", 4)
            tr.records.append(TraceRecord(int(t), entity, event, int(sub), detail))
    return tr


# ----------------------------------------------------------- invariant checks

def check_no_transmit_while_busy(trace: Trace):
    """Every node tx_start must follow that node's cca_clear, never a cca_busy."""
    last_cca = {}
    for rec in trace.records:
        if rec.event in ("cca_clear", "cca_busy"):
            last_cca[rec.entity] = rec.event
        elif rec.event == "tx_start":
            if last_cca.get(rec.entity) != "cca_clear":
                raise AssertionError(
                    f"{rec.entity} transmitted at {rec.time_us} without a clear CCA")


def check_ack_bijection(trace: Trace):
    """Decoded uplinks are acknowledged in the next epoch; every set bit has a decode."""
    pending = set()            # subcarriers decoded since the last epoch
    for rec in trace.records:
        if rec.event == "decode_ok":
            pending.add(rec.subcarrier)
        elif rec.event == "ack_tx_start":
            detail = parse_detail(rec.detail)
            bits = {int(b) for b in detail.get("bits", "").split("|") if b}
            if bits != pending:
                raise AssertionError(
                    f"ACK epoch at {rec.time_us} carries {sorted(bits)} but decodes were "
                    f"{sorted(pending)}")
            pending = set()
    # trailing decodes are allowed only if the run ended before the next epoch


def check_deferred_ack_bound(trace: Trace, ack_duration_us: int, slack_us: int = 2000):
    """A decode's ACK epoch finishes within 2 downlink transmission times."""
    waiting = []               # (decode_time, subcarrier)
    for rec in trace.records:
        if rec.event == "decode_ok":
            waiting.append((rec.time_us, rec.subcarrier))
        elif rec.event == "ack_tx_end":
            detail = parse_detail(rec.detail)
            bits = {int(b) for b in detail.get("bits", "").split("|") if b}
            still = []
            for t0, sub in waiting:
                if sub in bits:
                    if rec.time_us - t0 > 2 * ack_duration_us + slack_us:
                        raise AssertionError(
                            f"ACK for subcarrier {sub} decoded at {t0} delivered at "
                            f"{rec.time_us}: exceeds two downlink durations")
                else:
                    still.append((t0, sub))
            waiting = still


def check_join_subcarrier_clean(trace: Trace, join_index: int):
    """Join subcarrier never carries data traffic."""
    for rec in trace.records:
        if rec.event == "tx_start" and rec.subcarrier == join_index:
            raise AssertionError(f"data transmission on the join subcarrier at {rec.time_us}")


def check_all(trace: Trace, ack_duration_us: int, join_index: int):
    check_no_transmit_while_busy(trace)
    check_ack_bijection(trace)
    check_deferred_ack_bound(trace, ack_duration_us)
    check_join_subcarrier_clean(trace, join_index)
