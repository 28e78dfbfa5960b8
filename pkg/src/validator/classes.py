"""Resolution of ``both`` kinds to input or generated."""
from typing import Dict, Optional

from src.model.errors import MissingBothAssignmentError
from src.model.types import ComponentClass, InstanceSpec, ProblemSpec


def effective_classes(spec: ProblemSpec,
                      inst: Optional[InstanceSpec] = None) -> Dict[str, ComponentClass]:
    """Map every kind to INPUT or GENERATED.

    Args:
        spec: The problem specification.
        inst: Instance knowledge supplying the both-assignments. ``None`` selects
            the worst case, where every ``both`` kind counts as generated.

    Returns:
        Dict[str, ComponentClass]: kind name to its effective class.

    Raises:
        MissingBothAssignmentError: If ``inst`` is given and leaves a both kind unassigned.
    """
    result: Dict[str, ComponentClass] = {}
    for kind in spec.kinds:
        if kind.clazz is not ComponentClass.BOTH:
            result[kind.name] = kind.clazz
        elif inst is None:
            result[kind.name] = ComponentClass.GENERATED
        else:
            assigned = inst.both_assignments.get(kind.name)
            if assigned not in (ComponentClass.INPUT, ComponentClass.GENERATED):
                raise MissingBothAssignmentError(
                    f"Kind {kind.name} is of class both but the instance assigns no class")
            result[kind.name] = assigned
    return result


def generated_kinds(spec: ProblemSpec, classes: Dict[str, ComponentClass]) -> list:
    """Generated kind names in declaration order."""
    return [k.name for k in spec.kinds if classes[k.name] is ComponentClass.GENERATED]
