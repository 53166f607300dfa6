//! Truth tables, DNF formulas and their minimization.

pub mod dnf;
pub mod qm;
pub mod truth_table;

pub use dnf::{Clause, Dnf, Literal};
pub use qm::{minimize, prime_implicants, quine_mccluskey, Implicant};
pub use truth_table::{
    bit_of, bits_to_hex, dc_mask_for_patch, enumerate_block, hex_to_bits, row_bits, DcMask, TruthTable,
};
