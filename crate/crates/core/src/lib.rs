pub mod backend;
pub mod cli;
pub mod corpus;
pub mod decoder;
pub mod filters;
pub mod lexer;
pub mod pipeline;
