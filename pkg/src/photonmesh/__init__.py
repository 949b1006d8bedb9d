"""photonmesh: defect-circumventing compiler and verifier for MZI meshes.

Program a rectangular (or shallow brick-wall) interferometer mesh, route all
light away from fabrication defects so the surviving hardware acts as a
smaller universal interferometer, prove the isolation by simulation, and
quantify the resulting gain in fabrication yield.
"""

from .circumvent import (
    ABOVE,
    BELOW,
    NESW,
    NWSE,
    DiagonalClass,
    PlanAnalysis,
    RoutingPlan,
    analyze_plan,
    classify_segment,
    effective_layout,
    embed_target,
    merge_plans,
    plan_defects,
    plan_settings,
    plan_single,
    reduce_defects,
    tunable_crossings,
)
from .decompose import (
    clements_decompose,
    crossing_matrix,
    embed_crossing,
    reconstruct,
    solve_reflected,
    unitarity_defect,
)
from .defects import (
    DeadPhaseShifter,
    DefectSpec,
    RangeLimitedCrossing,
    SegmentLoss,
    StuckCrossing,
    defect_segments,
)
from .exceptions import (
    DefectError,
    EmbedError,
    EmbedStructureError,
    LayoutError,
    NonUnitaryError,
    PhotonMeshError,
    PlanError,
    SerializationError,
    SettingsError,
    UnsalvageableError,
)
from .interchange import ParsedDocument, parse_mesh, serialize_mesh
from .mesh import (
    ComponentCounts,
    Crossing,
    Mesh,
    MeshLayout,
    MeshSettings,
    Segment,
    build_mesh,
    component_counts,
    neighbors,
)
from .simulate import (
    VerificationReport,
    amplitude_at,
    effective_matrix,
    max_isolated_light,
    probe_amplitudes,
    transfer,
    verify_plan,
)
from .yield_analysis import (
    APPROXIMATE,
    EXACT,
    MonteCarloEstimate,
    component_count,
    max_modes_overhead,
    max_modes_plain,
    monte_carlo_yield,
    p_at_most,
    p_zero_defect,
    threshold_epsilon,
    tolerance_curve,
    tolerance_curve_csv,
)

__version__ = "0.1.0"
