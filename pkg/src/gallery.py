"""Bundled example presentations with their expected outcomes."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .config import AppConfig
from .decision import DecisionEngine
from .ellipticity import SemidirectElement, elliptic_density, local_elliptic_density, power_norm_divergence
from .errors import AlmostEllipticError, GalleryFailure, InputError
from .logger import LoggerMixin
from .presentation import GroupPresentation, as_general
from .presentation_io import PresentationLoader, read_json

GALLERY_DIR = Path(__file__).resolve().parent.parent / "gallery"
GALLERY_NAMES = (
    "rot2",
    "triv_line",
    "mixed3",
    "z2inv",
    "heis_rot",
    "heis_rot_complex",
    "e2_cover",
    "su2",
    "sl2r",
    "un_gl",
)


@dataclass
class GalleryResult:
    name: str
    checks: Dict[str, Any] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "checks": self.checks, "failures": self.failures}


class GalleryRunner(LoggerMixin):
    """Runs gallery entries and compares each against its ``expect`` block."""

    def __init__(
        self,
        config: Optional[AppConfig] = None,
        seed: Optional[int] = None,
        samples: Optional[int] = None,
        gallery_dir: Path = GALLERY_DIR,
    ):
        self.config = config or AppConfig()
        self.seed = self.config.sampling.seed if seed is None else seed
        self.samples = samples or self.config.sampling.samples
        self.gallery_dir = Path(gallery_dir)
        self.engine = DecisionEngine(self.config, self.seed)

    def path_for(self, name: str) -> Path:
        if name not in GALLERY_NAMES:
            raise InputError(f"unknown gallery entry {name!r}; expected one of {list(GALLERY_NAMES)}", {"name": name})
        return self.gallery_dir / f"{name}.json"

    def load(self, name: str) -> Dict[str, Any]:
        data, _ = read_json(self.path_for(name))
        return data

    def presentation(self, name: str) -> GroupPresentation:
        data, text = read_json(self.path_for(name))
        loader = PresentationLoader(text, name, self.config.sampling.quadrature_points)
        return loader.document(data)

    def run(self, names: Optional[Sequence[str]] = None) -> List[GalleryResult]:
        """Run the named entries (all by default); raise GalleryFailure if any check fails."""
        selected = list(names) if names else list(GALLERY_NAMES)
        for name in selected:
            self.path_for(name)
        results = [self.run_entry(name) for name in selected]
        failed = [result.name for result in results if not result.passed]
        if failed:
            self.logger.error(f"Gallery entries failed: {', '.join(failed)}")
            raise GalleryFailure(f"gallery entries failed: {', '.join(failed)}", {"results": results})
        self.logger.info(f"All {len(results)} gallery entries passed")
        return results

    def run_entry(self, name: str) -> GalleryResult:
        self.logger.info(f"Running gallery entry {name}")
        data = self.load(name)
        expect = data.get("expect", {})
        result = GalleryResult(name)
        try:
            if "family" in data:
                self._check_power_norms(data, expect, result)
            else:
                self._check_presentation(name, expect, result)
        except AlmostEllipticError as e:
            result.failures.append(f"{type(e).__name__}: {e.message}")
            result.checks["error"] = e.to_dict()
        for failure in result.failures:
            self.logger.warning(f"{name}: {failure}")
        return result

    def _check_presentation(self, name: str, expect: Dict[str, Any], result: GalleryResult) -> None:
        presentation = self.presentation(name)

        if "decide_error" in expect:
            try:
                self.engine.decide(presentation)
                result.failures.append(f"decide should have raised {expect['decide_error']}")
            except AlmostEllipticError as e:
                result.checks["decide_error"] = type(e).__name__
                if type(e).__name__ != expect["decide_error"]:
                    result.failures.append(f"decide raised {type(e).__name__}, expected {expect['decide_error']}")

        if "verdict" in expect:
            report = self.engine.decide(presentation)
            result.checks["decision"] = report
            if report.verdict != expect["verdict"]:
                result.failures.append(f"verdict {report.verdict}, expected {expect['verdict']}")
            if "weights" in expect and report.weights is not None:
                entries = report.weights.to_dict()["entries"]
                if entries != expect["weights"]:
                    result.failures.append(f"weights {entries}, expected {expect['weights']}")
            if expect.get("warnings") and not report.warnings:
                result.failures.append("expected an undeclared compact direction warning")

        if "general_verdict" in expect:
            report = self.engine.decide_general(as_general(presentation))
            result.checks["general_decision"] = report
            if report.verdict != expect["general_verdict"]:
                result.failures.append(f"general verdict {report.verdict}, expected {expect['general_verdict']}")

        if "elliptic_density" in expect:
            estimate = elliptic_density(
                presentation, self.samples, self.seed, self.config.sampling, self.config.solver, self.config.tolerances
            )
            result.checks["elliptic_density"] = estimate
            if estimate.fraction != expect["elliptic_density"] or estimate.undetermined:
                result.failures.append(
                    f"elliptic density {estimate.fraction} with {estimate.undetermined} undetermined, "
                    f"expected exactly {expect['elliptic_density']}"
                )

        if "local_density" in expect:
            local = expect["local_density"]
            center = SemidirectElement(np.array(local["translation"]), np.array(local["t"]), local.get("component"))
            estimate = local_elliptic_density(
                presentation,
                center,
                local["radius"],
                self.samples,
                self.seed,
                self.config.sampling,
                self.config.solver,
                self.config.tolerances,
            )
            result.checks["local_density"] = estimate
            if estimate.fraction != local["value"]:
                result.failures.append(f"local density {estimate.fraction}, expected {local['value']}")

        if "global_density" in expect:
            target = expect["global_density"]
            samples = min(self.samples, int(target.get("samples", self.samples)))
            estimate = elliptic_density(
                presentation, samples, self.seed, self.config.sampling, self.config.solver, self.config.tolerances
            )
            result.checks["global_density"] = estimate
            if abs(estimate.fraction - target["value"]) > target["tolerance"]:
                result.failures.append(f"global density {estimate.fraction}, expected about {target['value']}")

        if "permanence" in expect:
            layer = int(expect["permanence"]["layer"])
            target = presentation if presentation.kind != "vector_by_compact" else as_general(presentation)
            report = self.engine.permanence_check(target, layer)
            result.checks["permanence"] = report
            found = {"group": report.group, "quotient": report.quotient, "layer": report.layer}
            for part, verdict in expect["permanence"].get("verdicts", {}).items():
                if found.get(part) != verdict:
                    result.failures.append(f"permanence {part} verdict {found.get(part)}, expected {verdict}")

    def _check_power_norms(self, data: Dict[str, Any], expect: Dict[str, Any], result: GalleryResult) -> None:
        family_spec = data["family"]
        family, labels = PresentationLoader().power_family(family_spec)
        kmax = self.config.power_norms.kmax
        outcome = power_norm_divergence(family, kmax, labels, self.config.tolerances)
        result.checks["power_norms"] = outcome

        minimum = float(expect.get("min_sup", 0.0))
        low = [label for label, sup in zip(outcome.labels, outcome.suprema) if sup < minimum - 1e-9]
        if low:
            result.failures.append(f"sup below {minimum} for {low}")

        if expect.get("monotone"):
            tilts = len(family_spec["tilts"])
            for start in range(0, len(outcome.suprema), tilts):
                row = outcome.suprema[start : start + tilts]
                order = np.argsort(family_spec["tilts"])[::-1]
                ordered = [row[i] for i in order]
                if any(b <= a for a, b in zip(ordered, ordered[1:])):
                    result.failures.append(f"suprema do not grow as the line tilts: {outcome.labels[start]}")


def run_gallery(
    name: Optional[str] = None, config: Optional[AppConfig] = None, seed: Optional[int] = None
) -> List[GalleryResult]:
    return GalleryRunner(config, seed).run([name] if name else None)
