"""
Volumetric features: chamber and myocardium volumes, ratios to the LV and ejection fractions
"""
import logging
from typing import Dict, List, Tuple

from app.models.features import FeatureGroup, FeatureSpec, FeatureVector
from app.models.volume import Phase, Structure, SubjectStudy, extract_mask, physical_volume_mm3
from app.utils.errors import DataError, DegenerateStructureError

logger = logging.getLogger(__name__)

BOTH_PHASES = "ED+ES"

VolumeTable = Dict[Tuple[str, str], float]


def ejection_fraction(edv: float, esv: float) -> float:
    """(EDV - ESV) / EDV; an ESV above the EDV gives a negative fraction"""
    if edv <= 0:
        raise DegenerateStructureError(f"Ejection fraction needs EDV > 0, got {edv}")
    return (edv - esv) / edv


def structure_volumes(study: SubjectStudy) -> VolumeTable:
    """Physical volume in mm^3 of every foreground structure at both phases"""
    table = {}
    for phase in (Phase.ED, Phase.ES):
        volume = study.phase(phase.value)
        for structure in (Structure.RV, Structure.MC, Structure.LV):
            table[(structure.name, phase.value)] = physical_volume_mm3(extract_mask(volume, structure))
    return table


def volumetric_specs() -> List[FeatureSpec]:
    """The twelve volumetric entries of the default manifest"""
    specs = []
    for structure in ("LV", "RV", "MC"):
        for phase in ("ED", "ES"):
            specs.append(FeatureSpec(
                name=f"{structure}_{phase}V",
                group=FeatureGroup.VOLUMETRIC,
                structure=structure,
                phase=phase,
                params={"quantity": "volume"},
            ))
    for structure in ("RV", "MC"):
        for phase in ("ED", "ES"):
            specs.append(FeatureSpec(
                name=f"{structure}_LV_ratio_{phase}",
                group=FeatureGroup.VOLUMETRIC,
                structure=structure,
                phase=phase,
                params={"quantity": "ratio", "denominator": "LV"},
            ))
    for structure in ("LV", "RV"):
        specs.append(FeatureSpec(
            name=f"{structure}_EF",
            group=FeatureGroup.VOLUMETRIC,
            structure=structure,
            phase=BOTH_PHASES,
            params={"quantity": "ef"},
        ))
    return specs


def volumetric_value(volumes: VolumeTable, spec: FeatureSpec) -> float:
    """Evaluate one volumetric manifest entry against a table of structure volumes"""
    quantity = spec.params.get("quantity", "volume")
    if quantity == "volume":
        return volumes[(spec.structure, spec.phase)]

    if quantity == "ratio":
        denominator = spec.params.get("denominator", "LV")
        below = volumes[(denominator, spec.phase)]
        if below <= 0:
            raise DegenerateStructureError(
                f"{spec.name}: {denominator} at {spec.phase} has zero volume"
            )
        return volumes[(spec.structure, spec.phase)] / below

    if quantity == "ef":
        edv = volumes[(spec.structure, Phase.ED.value)]
        if edv <= 0:
            raise DegenerateStructureError(f"{spec.name}: {spec.structure} at ED has zero volume")
        return ejection_fraction(edv, volumes[(spec.structure, Phase.ES.value)])

    raise DataError(f"{spec.name}: unknown volumetric quantity {quantity!r}")


def volumetric_features(study: SubjectStudy) -> FeatureVector:
    """The twelve volumetric features of one study"""
    volumes = structure_volumes(study)
    values = {spec.name: volumetric_value(volumes, spec) for spec in volumetric_specs()}
    return FeatureVector.from_dict(values)
