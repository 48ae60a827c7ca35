//! Mixed nonconforming finite elements for strain gradient elasticity with
//! natural boundary conditions, and numerical probes of the broken Hardy
//! inequality.

pub mod assembly;
pub mod element;
pub mod hardy;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod solutions;
pub mod space;
pub mod study;
