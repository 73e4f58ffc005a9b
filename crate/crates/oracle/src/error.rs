use cud_core::ModelError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{what} = {got} exceeds the oracle budget of {limit}")]
    Budget {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("enumeration visited more than {0} distinct states")]
    StateLimit(usize),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
