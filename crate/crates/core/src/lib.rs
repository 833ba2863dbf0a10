pub mod cli;
pub mod codes;
pub mod cyclotomic;
pub mod expsums;
pub mod gf;
pub mod report;
pub mod theory;
