//! Exact wave packets for a free particle confined to a wedge of opening
//! angle `pi/N`, built from signed image copies of a Gaussian packet.
//!
//! - [`gaussian`]: closed-form 1D/2D free Gaussian packets.
//! - [`images`]: the dihedral image set and wedge membership.
//! - [`wavefunction`]: the image-sum wavefunction, gradients and density grids.
//! - [`observables`]: masked quadrature for norm, position, momentum and energy.
//! - [`momentum`]: half-line mirror packet and its momentum-space density.
//! - [`config`], [`artifacts`], [`run`]: the `wedgewave` command line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod config;
pub mod error;
pub mod gaussian;
pub mod images;
pub mod momentum;
pub mod observables;
pub mod run;
pub mod wavefunction;

pub use error::{Error, Result};
pub use gaussian::{GaussianPacket2D, PacketParams1D};
pub use images::{
    build_wedge_images, inside_wedge, verify_closure, ImageTerm, PlaneIsometry, Sign, WedgeSystem,
};
pub use wavefunction::{density_grid, grad_psi_wedge, psi_wedge, DensityGrid, GridSpec};
