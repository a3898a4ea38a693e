"""Size metrics comparing tabular controllers with their tree form.

One report row per controller variant: table row counts against total
decision-tree node counts, for the per-node action maps and the transition
maps separately.  Ratios render with two decimals in the CSV; the figure
renderer draws the same numbers as grouped bars next to the delimited
output.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .dtcontroller import DtFsc
from .dtree import tree_size
from .fsc import NodeTables

CSV_HEADER = (
    "benchmark,fsc_nodes,policy_rows,policy_dt_nodes,policy_ratio,"
    "trans_rows,trans_dt_nodes,trans_ratio,variant"
)

PLAIN_VARIANT = "dt-fsc"
SKIP_VARIANT = "skip-dt-fsc"


@dataclass(frozen=True)
class MetricsReport:
    benchmark: str
    fsc_nodes: int
    policy_rows: int
    policy_dt_nodes: int
    trans_rows: int
    trans_dt_nodes: int
    variant: str

    @property
    def policy_ratio(self) -> float:
        return self.policy_rows / self.policy_dt_nodes

    @property
    def trans_ratio(self) -> float:
        return self.trans_rows / self.trans_dt_nodes

    def csv_row(self) -> str:
        return (
            f"{self.benchmark},{self.fsc_nodes},{self.policy_rows},"
            f"{self.policy_dt_nodes},{self.policy_ratio:.2f},{self.trans_rows},"
            f"{self.trans_dt_nodes},{self.trans_ratio:.2f},{self.variant}"
        )


def build_report(
    benchmark: str,
    tables: Sequence[NodeTables],
    dtfsc: DtFsc,
    variant: str = PLAIN_VARIANT,
) -> MetricsReport:
    policy_rows = sum(len(t.action_rows) for t in tables)
    trans_rows = sum(len(t.transition_rows) for t in tables)
    tabulated = {t.node for t in tables}
    policy_nodes = sum(
        tree_size(tree)
        for n, tree in enumerate(dtfsc.action_trees)
        if tree is not None and n in tabulated
    )
    trans_nodes = sum(
        tree_size(tree)
        for n, tree in enumerate(dtfsc.transition_trees)
        if tree is not None and n in tabulated
    )
    return MetricsReport(
        benchmark=benchmark,
        fsc_nodes=len(tabulated),
        policy_rows=policy_rows,
        policy_dt_nodes=policy_nodes,
        trans_rows=trans_rows,
        trans_dt_nodes=trans_nodes,
        variant=variant,
    )


def to_csv(reports: Sequence[MetricsReport]) -> str:
    lines = [CSV_HEADER]
    lines += [r.csv_row() for r in reports]
    return "\n".join(lines) + "\n"


def render_figure(reports: Sequence[MetricsReport], path: str | Path) -> None:
    """Bar chart of table rows vs. tree nodes, saved next to the CSV."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [f"{r.benchmark}\n({r.variant})" for r in reports]
    x = range(len(reports))
    width = 0.2
    fig, ax = plt.subplots(figsize=(max(6.0, 1.8 * len(reports)), 4.0))
    ax.bar([i - 1.5 * width for i in x], [r.policy_rows for r in reports], width,
           label="policy rows")
    ax.bar([i - 0.5 * width for i in x], [r.policy_dt_nodes for r in reports], width,
           label="policy tree nodes")
    ax.bar([i + 0.5 * width for i in x], [r.trans_rows for r in reports], width,
           label="transition rows")
    ax.bar([i + 1.5 * width for i in x], [r.trans_dt_nodes for r in reports], width,
           label="transition tree nodes")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("count")
    ax.set_title("table rows vs. decision-tree nodes")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
