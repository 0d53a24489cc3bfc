#![no_std]
extern crate alloc;

pub mod fol;
pub mod transform;
pub mod oracle;
pub mod semiotic;
pub mod adjudicate;
pub mod textmetrics;
