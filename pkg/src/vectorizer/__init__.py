from .blocks import BlockForm, block_split, check_control_alignment, conjugation_residual
from .presets import one_qubit_system, preset_system, qutrit_v_system, two_qubit_system
from .states import CoherenceVector, coherence_to_rho, rho_to_coherence
from .system import (
    AssumptionReport,
    OpenSystemSpec,
    VectorizedSystem,
    check_assumptions,
    coherence_rhs,
    dissipation_rate,
    lindblad_rhs,
    vectorize,
)

__all__ = [
    'BlockForm',
    'block_split',
    'check_control_alignment',
    'conjugation_residual',
    'one_qubit_system',
    'preset_system',
    'qutrit_v_system',
    'two_qubit_system',
    'CoherenceVector',
    'coherence_to_rho',
    'rho_to_coherence',
    'AssumptionReport',
    'OpenSystemSpec',
    'VectorizedSystem',
    'check_assumptions',
    'coherence_rhs',
    'dissipation_rate',
    'lindblad_rhs',
    'vectorize',
]
