//! Hamiltonian mechanics on orbits of the metric-transpose ("transadjoint")
//! action of a Lie group on its Lie algebra.
//!
//! The crate builds Lie algebras from exact rational structure constants,
//! equips them with (possibly indefinite) metrics, splits them into pairs of
//! subalgebras, and integrates the Hamiltonian flows that live on the orbits
//! of the induced action — including a catalog of fully worked systems with
//! closed-form solutions and Lax pairs.
//!
//! ```
//! use orbitflow::catalog;
//!
//! let entry = catalog::entry("example_iii")?;
//! let sys = entry.build_system("sis22", None)?;
//! let traj = sys.integrate(std::f64::consts::TAU, 1e-3)?;
//! // the rotation flow returns to its start after a full period
//! assert!((traj.final_state() - &sys.initial).norm() < 1e-6);
//! # Ok::<(), orbitflow::Error>(())
//! ```

pub mod algebra;
pub mod catalog;
pub mod config;
pub mod error;
pub mod hamiltonian;
pub mod metric;
pub mod rat;
pub mod report;
pub mod representation;
pub mod splitting;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    macro_rules! book_chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    book_chapter!(introduction, "../../../book/src/introduction.md");
    book_chapter!(algebras, "../../../book/src/algebras.md");
    book_chapter!(metrics_gradients, "../../../book/src/metrics-and-gradients.md");
    book_chapter!(splittings, "../../../book/src/splittings.md");
    book_chapter!(flows, "../../../book/src/flows.md");
    book_chapter!(catalog, "../../../book/src/catalog.md");
    book_chapter!(diagnostics, "../../../book/src/diagnostics.md");
}
