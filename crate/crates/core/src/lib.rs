pub mod syntax;
pub mod parser;
pub mod kernel;
pub mod subtype;
pub mod holcore;
pub mod translate;
pub mod oracle;
pub mod atp;
pub mod pipeline;
