use serde::{Deserialize, Serialize};

use crate::data::FeatureSchema;
use crate::error::{Error, Result};
use crate::net::{LttBlock, MAX_BLOCK_INPUTS};

/// Bits of row `r` of an `n`-input table, `x0` first (most significant).
pub fn row_bits(n: usize, r: usize) -> Vec<bool> {
    (0..n).map(|j| (r >> (n - 1 - j)) & 1 == 1).collect()
}

#[inline]
pub fn bit_of(n: usize, r: usize, j: usize) -> bool {
    (r >> (n - 1 - j)) & 1 == 1
}

/// Pack a bit vector into hex, most significant bit of each nibble first,
/// padding the tail with zeros.
pub fn bits_to_hex(bits: &[bool]) -> String {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, b) in bits.iter().enumerate() {
        if *b {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    hex::encode(bytes)
}

pub fn hex_to_bits(s: &str, len: usize) -> Result<Vec<bool>> {
    let bytes = hex::decode(s).map_err(|e| Error::Schema(format!("bad hex table: {e}")))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::Schema(format!("hex table has {} bytes for {len} bits", bytes.len())));
    }
    Ok((0..len).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect())
}

/// Output column of one block over all `2^n` inputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTable {
    pub n: usize,
    pub outputs: Vec<bool>,
    pub filter_id: usize,
}

impl TruthTable {
    pub fn new(n: usize, outputs: Vec<bool>, filter_id: usize) -> Result<Self> {
        if n > MAX_BLOCK_INPUTS || outputs.len() != 1 << n {
            return Err(Error::Contract(format!(
                "table of {} rows is not 2^{n} (n <= {MAX_BLOCK_INPUTS})",
                outputs.len()
            )));
        }
        Ok(TruthTable { n, outputs, filter_id })
    }

    pub fn ones(&self) -> usize {
        self.outputs.iter().filter(|b| **b).count()
    }

    pub fn to_hex(&self) -> String {
        bits_to_hex(&self.outputs)
    }
}

pub fn enumerate_block(block: &LttBlock, filter_id: usize) -> Result<TruthTable> {
    let n = block.spec.n;
    if n > MAX_BLOCK_INPUTS {
        return Err(Error::Contract(format!("cannot enumerate a {n}-input block")));
    }
    let outputs = (0..1usize << n).map(|r| block.forward(&row_bits(n, r))).collect();
    TruthTable::new(n, outputs, filter_id)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DcMask {
    pub dont_care: Vec<bool>,
    pub patch_id: usize,
}

impl DcMask {
    pub fn none(n: usize, patch_id: usize) -> Self {
        DcMask {
            dont_care: vec![false; 1 << n],
            patch_id,
        }
    }

    pub fn count(&self) -> usize {
        self.dont_care.iter().filter(|b| **b).count()
    }
}

/// Rows that set two or more columns of one one-hot group.
pub fn dc_mask_for_patch(schema: &FeatureSchema, columns: &[usize], patch_id: usize) -> DcMask {
    let groups: Vec<Option<usize>> = columns.iter().map(|&c| schema.column(c).group_id).collect();
    let n = columns.len();
    let dont_care = (0..1usize << n)
        .map(|r| {
            let mut hot: Vec<usize> = (0..n)
                .filter(|&j| bit_of(n, r, j))
                .filter_map(|j| groups[j])
                .collect();
            hot.sort_unstable();
            hot.windows(2).any(|w| w[0] == w[1])
        })
        .collect();
    DcMask { dont_care, patch_id }
}
