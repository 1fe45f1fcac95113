//! Finite volumes for `d(ω(u)) = 0` on the spacetime `[0,T]×S¹`.
//!
//! Elements are trapezoids between consecutive slices `H_{t_i}`, `H_{t_{i+1}}`.
//! Each slab update balances the spacelike face integrals against monotone
//! Lax–Friedrichs fluxes through the two vertical faces and inverts the averaged
//! flux `φ_{e+}` on the future face.

mod diagnostics;
mod flux_field;
mod mesh;
mod scheme;

pub use diagnostics::{
    entropy_dissipation_bound, evaluate_piecewise, kruzkov_contraction, l1_distance_periodic, l1_distance_to,
    push_forward_breakpoints, DissipationBound,
};
pub use flux_field::{
    check_hyperbolicity, geometry_compatibility_check, sample_points, ClosureField, Coefficient, FluxField,
    FluxPreset, Identity, Pullback, Reparametrization, Scalar, Shear, SliceDiffeo, SHEAR_RATE,
};
pub use mesh::{check_refinement_sequence, SpacetimeMesh, FACES_PER_ELEMENT};
pub use scheme::{
    averaged_flux, discretize_initial_data, dissipation_parameters, entropy_residual, face_measure,
    numerical_flux, slice_faces, solve, spacetime_step, uniform_dissipation, DRule, Side, SlabDiagnostics, SlabGeometry, SlabOutput,
    SpacelikeFace, SpacetimeOptions, SpacetimeSolution, VerticalFace, CD_TOLERANCE, DEI_TOLERANCE,
    INITIAL_DATA_PANELS, MAX_PANEL,
};
