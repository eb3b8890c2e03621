pub mod audit;
pub mod experiment;
pub mod field;
pub mod general;
pub mod linalg;
pub mod mvpoly;
pub mod par;
pub mod rates;
pub mod rscode;
pub mod simnet;
pub mod systematic;
pub mod unipoly;
