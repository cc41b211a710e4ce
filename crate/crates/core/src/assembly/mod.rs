mod forms;
pub mod quadrature;

pub use forms::{
    basis_integrals, convection_matrix, cross_matrix, curl_pairing, curl_pairing_quadrature,
    div_pressure_matrix, load_vector, load_with, mass_matrix, mixed_mass, stiffness_matrix,
    LOAD_DEGREE,
};
pub use quadrature::QuadratureRule;
