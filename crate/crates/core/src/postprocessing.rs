//! Error correction and privacy amplification on the INFO string.
//!
//! Reconciliation is one-way syndrome decoding with a Hamming code: Alice
//! publishes the syndrome of each block of her bits, Bob compares it with his
//! own and flips the single position the difference points to. Privacy
//! amplification multiplies the reconciled string by a public random Toeplitz
//! matrix over GF(2).
//!
//! The final key length is a demonstration-grade heuristic (see
//! [`choose_key_length`]); it is not derived from a security bound.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PostprocessError {
    #[error("parity-check matrix is empty or ragged")]
    MalformedParityCheck,
    #[error("parity-check rows are linearly dependent over GF(2)")]
    DependentRows,
    #[error("Toeplitz seed has length {actual}, expected {expected}")]
    SeedLength { expected: usize, actual: usize },
    #[error("Toeplitz output length {output} exceeds input length {input}")]
    OutputTooLong { input: usize, output: usize },
    #[error("input has {actual} bits, hash expects {expected}")]
    InputLength { expected: usize, actual: usize },
    #[error("syndromes cover {expected} padded bits, input has {actual}")]
    BlockMismatch { expected: usize, actual: usize },
}

pub type Result<T> = std::result::Result<T, PostprocessError>;

/// Binary linear code given by its parity-check matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearCode {
    name: String,
    parity_check: Vec<Vec<u8>>,
}

impl LinearCode {
    pub fn new(name: impl Into<String>, parity_check: Vec<Vec<u8>>) -> Result<Self> {
        let width = parity_check.first().map_or(0, Vec::len);
        if width == 0 || parity_check.iter().any(|row| row.len() != width) {
            return Err(PostprocessError::MalformedParityCheck);
        }
        if gf2_rank(&parity_check) != parity_check.len() {
            return Err(PostprocessError::DependentRows);
        }
        Ok(LinearCode {
            name: name.into(),
            parity_check,
        })
    }

    /// Hamming code with `r` parity bits: column `j` (1-based) is the binary
    /// expansion of `j`, most significant bit in row 0.
    pub fn hamming(r: usize) -> Self {
        assert!((2..=10).contains(&r), "unsupported Hamming order {r}");
        let n = (1 << r) - 1;
        let parity_check = (0..r)
            .map(|row| {
                (1..=n)
                    .map(|col| ((col >> (r - 1 - row)) & 1) as u8)
                    .collect()
            })
            .collect();
        LinearCode::new(format!("Hamming({n},{})", n - r), parity_check)
            .expect("Hamming parity checks are independent")
    }

    /// The default reconciliation code.
    pub fn hamming74() -> Self {
        Self::hamming(3)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parity_check(&self) -> &[Vec<u8>] {
        &self.parity_check
    }

    pub fn block_len(&self) -> usize {
        self.parity_check[0].len()
    }

    pub fn syndrome_len(&self) -> usize {
        self.parity_check.len()
    }

    pub fn message_len(&self) -> usize {
        self.block_len() - self.syndrome_len()
    }

    pub fn syndrome(&self, block: &[u8]) -> Vec<u8> {
        assert_eq!(block.len(), self.block_len(), "block length");
        self.parity_check
            .iter()
            .map(|row| row.iter().zip(block).fold(0, |acc, (h, b)| acc ^ (h & b)))
            .collect()
    }

    /// Position whose parity-check column equals `syndrome`, if any.
    pub fn error_position(&self, syndrome: &[u8]) -> Option<usize> {
        if syndrome.iter().all(|&s| s == 0) {
            return None;
        }
        (0..self.block_len()).find(|&col| {
            self.parity_check
                .iter()
                .zip(syndrome)
                .all(|(row, &s)| row[col] == s)
        })
    }

    /// Positions that carry message bits: columns with more than one set entry.
    fn data_positions(&self) -> Vec<usize> {
        (0..self.block_len())
            .filter(|&c| self.parity_check.iter().filter(|row| row[c] == 1).count() != 1)
            .collect()
    }

    /// Systematic encoding for codes whose parity positions are unit columns
    /// (every Hamming code here).
    pub fn encode(&self, message: &[u8]) -> Vec<u8> {
        let data = self.data_positions();
        assert_eq!(message.len(), data.len(), "message length");
        let mut word = vec![0u8; self.block_len()];
        for (&pos, &bit) in data.iter().zip(message) {
            word[pos] = bit;
        }
        for (row, s) in self.syndrome(&word).into_iter().enumerate() {
            if s == 1 {
                let unit = (0..self.block_len())
                    .find(|&c| {
                        self.parity_check[row][c] == 1
                            && self.parity_check.iter().filter(|r| r[c] == 1).count() == 1
                    })
                    .expect("parity position for every row");
                word[unit] ^= 1;
            }
        }
        word
    }

    /// Message bits of a codeword.
    pub fn extract_message(&self, word: &[u8]) -> Vec<u8> {
        self.data_positions().iter().map(|&p| word[p]).collect()
    }

    /// Corrects up to one error and returns the message.
    pub fn decode(&self, received: &[u8]) -> Vec<u8> {
        let mut word = received.to_vec();
        if let Some(pos) = self.error_position(&self.syndrome(received)) {
            word[pos] ^= 1;
        }
        self.extract_message(&word)
    }
}

fn gf2_rank(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let width = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] == 1) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in 0..m.len() {
            if r != rank && m[r][col] == 1 {
                let pivot_row = m[rank].clone();
                m[r].iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

/// Syndromes Alice publishes for her (zero-padded) INFO string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Syndromes {
    pub block_len: usize,
    /// Zero bits appended to reach a whole number of blocks.
    pub pad_bits: usize,
    #[serde(serialize_with = "crate::bits::serialize_nested")]
    pub blocks: Vec<Vec<u8>>,
}

impl Syndromes {
    pub fn leaked_bits(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }
}

fn padded(bits: &[u8], block_len: usize) -> (Vec<u8>, usize) {
    let pad = (block_len - bits.len() % block_len) % block_len;
    let mut v = bits.to_vec();
    v.resize(bits.len() + pad, 0);
    (v, pad)
}

pub fn ecc_syndromes(alice_info: &[u8], code: &LinearCode) -> Syndromes {
    let (bits, pad_bits) = padded(alice_info, code.block_len());
    Syndromes {
        block_len: code.block_len(),
        pad_bits,
        blocks: bits
            .chunks(code.block_len())
            .map(|block| code.syndrome(block))
            .collect(),
    }
}

/// Bob's side of reconciliation. Corrects any single error per block; two or
/// more errors in one block can be miscorrected.
pub fn ecc_correct(bob_info: &[u8], syndromes: &Syndromes, code: &LinearCode) -> Result<Vec<u8>> {
    let (mut bits, pad) = padded(bob_info, code.block_len());
    if pad != syndromes.pad_bits || bits.len() != syndromes.blocks.len() * code.block_len() {
        return Err(PostprocessError::BlockMismatch {
            expected: syndromes.blocks.len() * code.block_len(),
            actual: bits.len(),
        });
    }
    for (block, alice) in bits.chunks_mut(code.block_len()).zip(&syndromes.blocks) {
        let diff: Vec<u8> = code
            .syndrome(block)
            .iter()
            .zip(alice)
            .map(|(a, b)| a ^ b)
            .collect();
        if let Some(pos) = code.error_position(&diff) {
            block[pos] ^= 1;
        }
    }
    bits.truncate(bob_info.len());
    Ok(bits)
}

/// Toeplitz matrix of shape `output_len x input_len` over GF(2), determined by
/// its `input_len + output_len - 1` diagonals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToeplitzHash {
    diagonal_seed: Vec<u8>,
    input_len: usize,
    output_len: usize,
}

impl ToeplitzHash {
    /// `entry(i, j) = diagonal_seed[i - j + input_len - 1]`.
    pub fn new(diagonal_seed: Vec<u8>, input_len: usize, output_len: usize) -> Result<Self> {
        if output_len > input_len {
            return Err(PostprocessError::OutputTooLong {
                input: input_len,
                output: output_len,
            });
        }
        let expected = (input_len + output_len).saturating_sub(1);
        if diagonal_seed.len() != expected {
            return Err(PostprocessError::SeedLength {
                expected,
                actual: diagonal_seed.len(),
            });
        }
        Ok(ToeplitzHash {
            diagonal_seed,
            input_len,
            output_len,
        })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, input_len: usize, output_len: usize) -> Result<Self> {
        let len = (input_len + output_len).saturating_sub(1);
        let seed = (0..len).map(|_| rng.random_range(0..=1u8)).collect();
        Self::new(seed, input_len, output_len)
    }

    /// Square identity: only the main diagonal is set.
    pub fn identity(len: usize) -> Self {
        let mut seed = vec![0u8; (2 * len).saturating_sub(1)];
        if len > 0 {
            seed[len - 1] = 1;
        }
        Self::new(seed, len, len).expect("identity shape is valid")
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn diagonal_seed(&self) -> &[u8] {
        &self.diagonal_seed
    }

    pub fn entry(&self, row: usize, col: usize) -> u8 {
        self.diagonal_seed[row + self.input_len - 1 - col]
    }
}

pub fn privacy_amplify(bits: &[u8], hash: &ToeplitzHash) -> Result<Vec<u8>> {
    if bits.len() != hash.input_len {
        return Err(PostprocessError::InputLength {
            expected: hash.input_len,
            actual: bits.len(),
        });
    }
    Ok((0..hash.output_len)
        .map(|i| {
            bits.iter()
                .enumerate()
                .fold(0u8, |acc, (j, &b)| acc ^ (hash.entry(i, j) & b))
        })
        .collect())
}

pub const DEFAULT_SECURITY_MARGIN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KeyLength {
    pub bits: usize,
    /// Set when the heuristic leaves nothing to extract.
    pub empty_key_warning: bool,
}

/// `max(0, n - leaked - margin)`. A placeholder rule, not a proven key rate.
pub fn choose_key_length(n: usize, leaked_syndrome_bits: usize, security_margin: usize) -> KeyLength {
    let bits = n.saturating_sub(leaked_syndrome_bits + security_margin);
    KeyLength {
        bits,
        empty_key_warning: bits == 0,
    }
}

/// Public data and results of reconciliation plus amplification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PostprocessOutcome {
    pub code: String,
    pub syndromes: Syndromes,
    #[serde(serialize_with = "crate::bits::serialize")]
    pub hash_seed: Vec<u8>,
    pub key_length: KeyLength,
    /// INFO positions where Bob still disagrees with Alice after correction.
    pub residual_mismatches: usize,
    #[serde(serialize_with = "crate::bits::serialize")]
    pub final_key_alice: Vec<u8>,
    #[serde(serialize_with = "crate::bits::serialize")]
    pub final_key_bob: Vec<u8>,
}

/// Runs both sides of the post-processing. Bob only uses his own bits and
/// the published syndromes and hash seed.
pub fn reconcile_and_amplify<R: Rng + ?Sized>(
    alice_info: &[u8],
    bob_info: &[u8],
    code: &LinearCode,
    security_margin: usize,
    rng: &mut R,
) -> Result<PostprocessOutcome> {
    let syndromes = ecc_syndromes(alice_info, code);
    let corrected = ecc_correct(bob_info, &syndromes, code)?;
    let residual_mismatches = corrected
        .iter()
        .zip(alice_info)
        .filter(|(a, b)| a != b)
        .count();
    let key_length = choose_key_length(alice_info.len(), syndromes.leaked_bits(), security_margin);
    let hash = ToeplitzHash::random(rng, alice_info.len(), key_length.bits)?;
    Ok(PostprocessOutcome {
        code: code.name().to_string(),
        final_key_alice: privacy_amplify(alice_info, &hash)?,
        final_key_bob: privacy_amplify(&corrected, &hash)?,
        hash_seed: hash.diagonal_seed,
        syndromes,
        key_length,
        residual_mismatches,
    })
}
