"""Check records and report serialization (JSON and plain text)."""

import json
import math
from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    citation: str
    residual: float
    tolerance: float
    passed: bool
    notes: str = ""
    extras: dict = field(default_factory=dict)


def make_check(name, citation, residual, tolerance, notes="", extras=None):
    residual = float(residual)
    ok = bool(residual <= tolerance) and not math.isnan(residual)
    return Check(name, citation, residual, float(tolerance), ok, notes, extras or {})


def failed_check(name, citation, tolerance, message):
    return Check(name, citation, float("inf"), float(tolerance), False, message, {})


@dataclass
class CheckReport:
    target: str
    params: dict
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "target": self.target,
            "params": self.params,
            "checks": [
                {
                    "name": c.name,
                    "citation": c.citation,
                    "residual": c.residual,
                    "tolerance": c.tolerance,
                    "pass": c.passed,
                    "notes": c.notes,
                    "extras": c.extras,
                }
                for c in self.checks
            ],
            "pass": self.passed,
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @staticmethod
    def from_json(text: str) -> "CheckReport":
        d = json.loads(text)
        checks = [
            Check(
                c["name"],
                c["citation"],
                float(c["residual"]),
                float(c["tolerance"]),
                bool(c["pass"]),
                c.get("notes", ""),
                c.get("extras", {}),
            )
            for c in d["checks"]
        ]
        return CheckReport(d["target"], d["params"], checks)

    def to_text(self) -> str:
        lines = [f"target: {self.target}"]
        if self.params:
            kv = ", ".join(f"{k}={v}" for k, v in self.params.items())
            lines.append(f"params: {kv}")
        width = max((len(c.name) for c in self.checks), default=0)
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            line = (
                f"  {status}  {c.name:<{width}}  residual={c.residual:.3e}"
                f"  tol={c.tolerance:.1e}"
            )
            if c.notes:
                line += f"  [{c.notes}]"
            lines.append(line)
            lines.append(f"        {'':{width}}  {c.citation}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)
