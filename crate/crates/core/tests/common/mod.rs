#![allow(dead_code)]
pub mod fixtures;
pub mod http_double;
pub mod mock_gen;
pub mod program_gen;
pub mod reference_lexer;
