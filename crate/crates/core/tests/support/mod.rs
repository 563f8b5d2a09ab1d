pub mod chess_oracle;
pub mod fuzz;
