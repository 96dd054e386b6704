pub mod block_codes;
pub mod ck_invariants;
pub mod cli;
pub mod fgab;
pub mod intlinalg;
pub mod shift_spaces;
pub mod spectral;
