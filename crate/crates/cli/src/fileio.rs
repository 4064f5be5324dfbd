//! File mode: arbitrary bytes in, packed staircase blocks out.
//!
//! The information stream is an 8-byte big-endian payload length followed
//! by the payload, zero-padded to whole blocks. Each block is written as
//! its packed bits (row-major, MSB-first), blocks in index order, followed
//! by `window - 1` flush blocks.

use anyhow::{bail, ensure, Result};
use staircase_core::bits::BitMatrix;
use staircase_core::staircase::{Encoder, StaircaseParams, WindowDecoder};
use staircase_sim::channel::{stream_rng, Bsc};

const LEN_BYTES: usize = 8;

fn info_bytes_per_block(p: &StaircaseParams) -> usize {
    p.info_bits_per_block() / 8
}

pub fn block_bytes(p: &StaircaseParams) -> usize {
    p.bits_per_block().div_ceil(8)
}

pub fn encode_bytes(params: &StaircaseParams, payload: &[u8]) -> Result<Vec<u8>> {
    ensure!(
        params.info_bits_per_block().is_multiple_of(8),
        "block payload of {} bits is not whole bytes",
        params.info_bits_per_block()
    );
    let per = info_bytes_per_block(params);
    let mut stream = Vec::with_capacity(LEN_BYTES + payload.len());
    stream.extend_from_slice(&(payload.len() as u64).to_be_bytes());
    stream.extend_from_slice(payload);
    let mut enc = Encoder::new(params.clone());
    let mut out = Vec::new();
    for chunk in stream.chunks(per) {
        let mut buf = chunk.to_vec();
        buf.resize(per, 0);
        let info = BitMatrix::from_bytes(params.rows(), params.info_cols(), &buf).expect("sized");
        out.extend(enc.encode_block(&info)?.bits.to_bytes());
    }
    for b in enc.flush() {
        out.extend(b.bits.to_bytes());
    }
    Ok(out)
}

/// Decodes a packed block stream, optionally passing it through a binary
/// symmetric channel first. Returns the payload and the number of channel
/// flips.
pub fn decode_bytes(params: &StaircaseParams, coded: &[u8], p: f64, seed: u64) -> Result<(Vec<u8>, u64)> {
    let bb = block_bytes(params);
    ensure!(
        !coded.is_empty() && coded.len().is_multiple_of(bb),
        "input length {} is not a positive multiple of the {bb}-byte block",
        coded.len()
    );
    let bsc = Bsc::new(p)?;
    let mut rng = stream_rng(seed, 0, 0);
    let mut dec = WindowDecoder::new(params.clone());
    let mut info = Vec::new();
    let mut flips = 0;
    let take = |bits: BitMatrix, info: &mut Vec<u8>| {
        let data = BitMatrix::from_fn(params.rows(), params.info_cols(), |r, c| bits.get(r, c));
        info.extend(data.to_bytes());
    };
    for chunk in coded.chunks(bb) {
        let mut bits = BitMatrix::from_bytes(params.rows(), params.cols(), chunk).expect("sized");
        flips += bsc.corrupt(&mut rng, &mut bits);
        if let Some(out) = dec.process(bits)? {
            take(out.bits, &mut info);
        }
    }
    for out in dec.finish() {
        take(out.bits, &mut info);
    }
    if info.len() < LEN_BYTES {
        bail!("decoded stream too short for its length header");
    }
    let len = u64::from_be_bytes(info[..LEN_BYTES].try_into().expect("8 bytes")) as usize;
    ensure!(
        len <= info.len() - LEN_BYTES,
        "decoded length header {len} exceeds the {} payload bytes available",
        info.len() - LEN_BYTES
    );
    Ok((info[LEN_BYTES..LEN_BYTES + len].to_vec(), flips))
}
