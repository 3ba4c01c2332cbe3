//! Simulation kernels for radiative decay of domain-wall defect modes under
//! time-periodic forcing.
//!
//! The Schrödinger model is `i∂ₜψ = (-∂ₓ² + V(x) + εκ(εx)W(x) + 2iεβcos(ωεt)∂ₓ)ψ`;
//! its envelope dynamics are governed by the forced Dirac operator
//! `iv_Dσ₃∂_X + ϑ♯κ(X)σ₁ + c·βcos(ωT)σ₃`.

pub mod analysis;
pub mod bloch;
pub mod dirac;
pub mod error;
pub mod linalg;
pub mod model;
pub mod modes;
pub mod schrodinger;

pub use analysis::{
    eta_a, fgr_resolvent, fit_exponential_decay, fit_power_law, gamma0, gamma0_resolvent, is_undersmoothed, lambda0,
    predicted_g,
    Absorber, DecayFit, FitWindow, PowerLawFit, SpectralData,
};
pub use bloch::{
    assemble_bloch_operator, band_structure, coupling_theta, dirac_eigenbasis, extract_dirac_parameters,
    fermi_velocity, BandStructure, DiracBasis, DiracParameters,
};
pub use dirac::{
    assemble_dirac_operator, evolve_dirac, g_series, DiracModel, DiracOperator, DiracPreset,
};
pub use error::{FloquetError, Result};
pub use model::{
    builtin_potential, eval_potential, forcing_value, Boundary, Bulk, DomainWallKind, ForcingSpec, GridSpec,
    PotentialSpec,
};
pub use modes::{
    assemble_dw_hamiltonian, dirac_zero_mode_analytic, dirac_zero_mode_numeric, envelope_from_wavepacket,
    midgap_mode, relative_discrepancy, wavepacket_from_envelope, DefectMode, DwHamiltonian, MidgapSearch,
    SlowGrid, SpinorField,
};
pub use schrodinger::{evolve_schrodinger, projection_series, EvolutionTrace, EvolveOptions, SchrodingerStepper};
