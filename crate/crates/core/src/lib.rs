#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod arith;
pub mod odemodel;
pub mod detsys;
pub mod algsolve;
pub mod verify;
pub mod strategies;
