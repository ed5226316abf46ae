"""
量子控制景观梯度流模块
提供运动学梯度流的解析解与数值积分、收敛时间上界审计以及场空间梯度
"""

from .complexity import (
    ConvergenceReport,
    GateBoundReport,
    HaltSpec,
    ScalingStudy,
    StudyConfig,
    basin_boundary_sweep,
    bound_path_length,
    bound_tc_eps_observable,
    bound_tc_gate,
    bound_tc_region_observable,
    bound_tc_total_observable,
    distance_gate,
    distance_observable,
    fit_decay_rate,
    in_attracting_region,
    measure_tc,
    path_length,
    run_scaling_study,
)
from .config import ExperimentConfig, Scenario, load_config
from .dyncontrol import (
    ControlField,
    ControlSystem,
    GMatrix,
    Objective,
    check_chain_rule,
    g_matrix,
    grad_phi1,
    grad_phi2,
    gradient_ascent,
    heisenberg_dipole,
    propagate,
)
from .errors import LandscapeError
from .flows import (
    FlowTrajectory,
    GateProblem,
    IntegratorOptions,
    ObservableProblem,
    SimplexPoint,
    analytic_gate,
    analytic_x,
    double_bracket_rhs,
    integrate,
    isospectral_step,
    phi1,
    phi2,
    rhs_gate,
    rhs_observable_unitary,
)
from .matcore import Spectrum, eig_unitary, eigh, expm_skew, sample

__version__ = "0.1.0"

__all__ = [
    '__version__',
    'Spectrum', 'eigh', 'eig_unitary', 'expm_skew', 'sample',
    'SimplexPoint', 'ObservableProblem', 'GateProblem', 'FlowTrajectory', 'IntegratorOptions',
    'phi1', 'phi2', 'rhs_observable_unitary', 'rhs_gate', 'analytic_x', 'analytic_gate',
    'integrate', 'double_bracket_rhs', 'isospectral_step',
    'HaltSpec', 'ConvergenceReport', 'GateBoundReport', 'ScalingStudy', 'StudyConfig',
    'distance_observable', 'distance_gate', 'in_attracting_region', 'measure_tc',
    'bound_tc_eps_observable', 'bound_tc_region_observable', 'bound_tc_total_observable',
    'bound_tc_gate', 'path_length', 'bound_path_length', 'run_scaling_study',
    'fit_decay_rate', 'basin_boundary_sweep',
    'ControlSystem', 'ControlField', 'GMatrix', 'Objective', 'propagate', 'heisenberg_dipole',
    'grad_phi1', 'grad_phi2', 'g_matrix', 'check_chain_rule', 'gradient_ascent',
    'ExperimentConfig', 'Scenario', 'load_config',
    'LandscapeError',
]
