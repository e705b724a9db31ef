"""Compatibility-hypergraph contextuality toolkit and a classical coin-toss box simulator."""

__version__ = "0.1.0"

from .scenario import (  # noqa: E402
    BOT, TOP, JointOutcome, Scenario, ScenarioValidationError, build_n_cycle,
    enumerate_joint_outcomes, validate_scenario,
)
from .behaviors import (  # noqa: E402
    Behavior, MarginalDistribution, check_nondisturbance, generalized_coin_toss, marginalize,
    rearranged_device_behavior,
)
from .polytope import (  # noqa: E402
    GlobalDistribution, NCDecision, NCInequality, decide_noncontextual, deterministic_vertices,
    evaluate_inequality, kcbs_inequality, verify_global_section,
)
from .realizations import (  # noqa: E402
    ClassicalRealization, QuantumRealization, classical_to_quantum, nc_to_classical,
    verify_classical, verify_quantum,
)
