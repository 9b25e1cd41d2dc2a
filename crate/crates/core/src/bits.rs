//! Bit strings (`Vec<u8>` of 0/1) rendered as `"0110..."` in reports.

use serde::Serializer;

pub fn to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

pub fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub(crate) fn serialize<S: Serializer>(bits: &[u8], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_string(bits))
}

pub(crate) fn serialize_nested<S: Serializer>(blocks: &[Vec<u8>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(blocks.iter().map(|b| to_string(b)))
}

pub(crate) fn serialize_opt<S: Serializer>(bits: &Option<Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
    match bits {
        Some(b) => s.serialize_some(&to_string(b)),
        None => s.serialize_none(),
    }
}
