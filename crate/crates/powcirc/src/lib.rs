pub mod baumslag;
pub mod cli;
pub mod csdr;
pub mod oracle;
pub mod powercircuit;
