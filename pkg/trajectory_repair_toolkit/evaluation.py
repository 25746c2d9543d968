"""
Evaluation of the repair: trajectory class counts without and with the repair algorithm.

The report has one row per class (Complete, Incomplete, Noise; Unreliable trajectories are
counted as Incomplete) plus a Total row, and lists the number and percentage of trajectories
without and with the algorithm, followed by the number of fusions and of fusions that increased
the confidence value.
"""
import csv
import io
import logging
import os
from dataclasses import dataclass
from typing import Tuple

from .confidence import TrajectoryClass, classify
from .exceptions import ValidationError

logger = logging.getLogger(__name__)

REPORT_ROWS = ("Complete", "Incomplete", "Noise")

REPORT_CSV_COLUMNS = ('class', 'without_number', 'without_percent', 'with_number', 'with_percent')

# Trajectory class -> report row
_CLASS_TO_ROW = {
    TrajectoryClass.COMPLETE: "Complete",
    TrajectoryClass.INCOMPLETE: "Incomplete",
    TrajectoryClass.UNRELIABLE: "Incomplete",
    TrajectoryClass.NOISE: "Noise",
}


def class_counts(cvs):
    """
    Count trajectories per report row.

    Parameters
    ----------
    cvs : iterable of float
        Confidence values.

    Returns
    -------
    counts : tuple
        Number of Complete, Incomplete (including Unreliable) and Noise trajectories.
    """
    counts = dict.fromkeys(REPORT_ROWS, 0)
    for cv in cvs:
        counts[_CLASS_TO_ROW[classify(cv)]] += 1
    return tuple(counts[row] for row in REPORT_ROWS)


def _format_percentage(count, total):
    if total == 0:
        return "0.0"
    return f"{100.0 * count / total:.1f}"


@dataclass(frozen=True)
class EvaluationReport:
    before: Tuple[int, int, int]  # Complete, Incomplete, Noise
    after: Tuple[int, int, int]
    fusions: int
    improved: int

    def __post_init__(self):
        object.__setattr__(self, 'before', tuple(int(count) for count in self.before))
        object.__setattr__(self, 'after', tuple(int(count) for count in self.after))

        assert len(self.before) == len(REPORT_ROWS) and len(self.after) == len(REPORT_ROWS)
        if self.total_after != self.total_before - self.fusions:
            raise ValidationError(
                f"Inconsistent report: {self.total_before} trajectories before and {self.total_after} after "
                f"{self.fusions} fusion(s)")
        if not 0 <= self.improved <= self.fusions:
            raise ValidationError(f"Inconsistent report: {self.improved} improved of {self.fusions} fusion(s)")

    @classmethod
    def from_counts(cls, before, after, fusions, improved):
        return cls(tuple(before), tuple(after), fusions, improved)

    @property
    def total_before(self):
        return sum(self.before)

    @property
    def total_after(self):
        return sum(self.after)

    def rows(self):
        """
        Report rows as strings: (label, number without, % without, number with, % with).

        The Total row shows "100" as its percentage.
        """
        rows = []
        for label, count_before, count_after in zip(REPORT_ROWS, self.before, self.after):
            rows.append((
                label,
                str(count_before),
                _format_percentage(count_before, self.total_before),
                str(count_after),
                _format_percentage(count_after, self.total_after),
            ))
        rows.append(("Total", str(self.total_before), "100", str(self.total_after), "100"))
        return rows

    def render(self):
        """Render the report as aligned plain text."""
        lines = [
            f"{'Trajectory class':<18}{'Without algorithm':>22}{'With algorithm':>22}",
            f"{'':<18}{'Number':>12}{'%':>10}{'Number':>12}{'%':>10}",
        ]
        for label, count_before, pct_before, count_after, pct_after in self.rows():
            lines.append(f"{label:<18}{count_before:>12}{pct_before:>10}{count_after:>12}{pct_after:>10}")
        lines.append("")
        lines.append(f"Fusions: {self.fusions} (confidence increased: {self.improved})")
        return "\n".join(lines) + "\n"

    def to_csv(self):
        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(REPORT_CSV_COLUMNS)
        writer.writerows(self.rows())
        writer.writerow(("Fusions", "", "", str(self.fusions), ""))
        writer.writerow(("Improved", "", "", str(self.improved), ""))
        return output.getvalue()


def evaluate(before_cvs, after_cvs, fusions, improved):
    """
    Build the evaluation report.

    Parameters
    ----------
    before_cvs : iterable of float
        Confidence values of the trajectories without the repair.
    after_cvs : iterable of float
        Confidence values of the repaired trajectories, scored with the same weights and
        normalization statistics.
    fusions : int
        Number of fusions.
    improved : int
        Number of fusions whose confidence value increased.

    Returns
    -------
    report : EvaluationReport
        The report.
    """
    report = EvaluationReport.from_counts(class_counts(before_cvs), class_counts(after_cvs), fusions, improved)
    logger.debug("Evaluation: %d -> %d trajectories, %d fusion(s)", report.total_before, report.total_after,
                 report.fusions)
    return report


def csv_twin_filename(filename):
    """Name of the CSV twin of a text report: the same path with a .csv extension."""
    return os.path.splitext(filename)[0] + ".csv"


def save_report(filename, report):
    """
    Write the report as plain text, plus its CSV twin.

    Returns
    -------
    csv_filename : str
        Name of the written CSV twin.
    """
    with open(filename, 'w', encoding='utf-8', newline='') as fp:
        fp.write(report.render())

    csv_filename = csv_twin_filename(filename)
    if os.path.abspath(csv_filename) != os.path.abspath(filename):
        with open(csv_filename, 'w', encoding='utf-8', newline='') as fp:
            fp.write(report.to_csv())
    return csv_filename
