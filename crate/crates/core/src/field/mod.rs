//! Exact arithmetic over cyclotomic-coefficient rational function fields,
//! the involution, and the transcendence-degree and relation-lattice
//! primitives.

pub mod involution;
pub mod linear;
pub mod modp;
pub mod namer;
pub mod parse;
pub mod poly;
pub mod ratexpr;
pub mod reembed;
pub mod relations;
pub mod scalar;
pub mod trdeg;

pub use involution::{Involution, InvolutionRepr};
pub use linear::{q_coordinates, q_rank};
pub use namer::Namer;
pub use parse::parse_expr;
pub use poly::{Monomial, Poly, Var};
pub use ratexpr::RatExpr;
pub use reembed::{reembed, Receipt, ReembedKind};
pub use relations::{mult_relations, mult_relations_wrt, q_linear_relations, q_linear_relations_wrt, RelationLattice, Torsion};
pub use scalar::Scalar;
pub use trdeg::{jacobian_rank, tr_deg, tr_deg_wrt};

