pub mod belief;
pub mod cli;
pub mod concavify;
pub mod device;
pub mod error;
pub mod lp;
pub mod meu;
pub mod oracle;
pub mod value;
pub mod vbp;
