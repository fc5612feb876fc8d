//! Bit-packed spike streams, windows over them, and the `.spk` codec.
//!
//! A stream is `length` frames of `height × width` binary pixels. Each frame is
//! stored row-major, one bit per pixel, LSB-first within a byte, and padded to a
//! byte boundary. Ticks are absolute: frame `n` sits at tick `origin_tick + n`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const SPK_MAGIC: &[u8; 4] = b"SPKS";
pub const SPK_VERSION: u16 = 1;
/// magic + version + H + W + N + origin
pub const SPK_HEADER_LEN: usize = 4 + 2 + 4 + 4 + 4 + 8;

/// Default window length `2Δt + 1`.
pub const DEFAULT_WINDOW_LEN: usize = 41;

#[inline]
pub fn frame_bytes(height: usize, width: usize) -> usize {
    (height * width).div_ceil(8)
}

#[derive(Clone, PartialEq, Eq)]
pub struct SpikeStream {
    height: usize,
    width: usize,
    length: usize,
    origin_tick: u64,
    bits: Vec<u8>,
}

impl std::fmt::Debug for SpikeStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpikeStream")
            .field("height", &self.height)
            .field("width", &self.width)
            .field("length", &self.length)
            .field("origin_tick", &self.origin_tick)
            .field("spikes", &self.total_spikes())
            .finish()
    }
}

impl SpikeStream {
    /// An empty (no spike) stream.
    pub fn zeros(height: usize, width: usize, length: usize, origin_tick: u64) -> Result<Self> {
        if height == 0 || width == 0 || length == 0 {
            return Err(Error::Argument(format!(
                "stream dims must be positive, got {height}x{width}x{length}"
            )));
        }
        let fb = frame_bytes(height, width);
        let total = fb
            .checked_mul(length)
            .ok_or_else(|| Error::Argument("stream too large".into()))?;
        Ok(Self {
            height,
            width,
            length,
            origin_tick,
            bits: vec![0; total],
        })
    }

    /// Builds a stream from a predicate over `(frame, row, col)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        length: usize,
        origin_tick: u64,
        mut f: impl FnMut(usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let mut s = Self::zeros(height, width, length, origin_tick)?;
        for n in 0..length {
            for y in 0..height {
                for x in 0..width {
                    if f(n, y, x) {
                        s.set(n, y * width + x, true);
                    }
                }
            }
        }
        Ok(s)
    }

    /// Wraps already packed frames. Padding bits must be zero.
    pub fn from_packed(
        height: usize,
        width: usize,
        length: usize,
        origin_tick: u64,
        bits: Vec<u8>,
    ) -> Result<Self> {
        let mut s = Self::zeros(height, width, length, origin_tick)?;
        if bits.len() != s.bits.len() {
            return Err(Error::Length {
                expected: s.bits.len(),
                actual: bits.len(),
            });
        }
        s.bits = bits;
        s.check_padding()?;
        Ok(s)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    /// Number of frames (ticks).
    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn origin_tick(&self) -> u64 {
        self.origin_tick
    }

    /// Absolute tick of the last frame.
    pub fn last_tick(&self) -> u64 {
        self.origin_tick + self.length as u64 - 1
    }

    pub fn frame_bytes(&self) -> usize {
        frame_bytes(self.height, self.width)
    }

    pub fn packed(&self) -> &[u8] {
        &self.bits
    }

    /// Packed bytes of frame `n` (relative to origin).
    pub fn frame(&self, n: usize) -> &[u8] {
        let fb = self.frame_bytes();
        &self.bits[n * fb..(n + 1) * fb]
    }

    pub(crate) fn frame_mut(&mut self, n: usize) -> &mut [u8] {
        let fb = self.frame_bytes();
        &mut self.bits[n * fb..(n + 1) * fb]
    }

    #[inline]
    pub fn get(&self, n: usize, pixel: usize) -> bool {
        let byte = self.bits[n * self.frame_bytes() + pixel / 8];
        byte >> (pixel % 8) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, n: usize, pixel: usize, value: bool) {
        let fb = self.frame_bytes();
        let byte = &mut self.bits[n * fb + pixel / 8];
        let mask = 1u8 << (pixel % 8);
        if value {
            *byte |= mask;
        } else {
            *byte &= !mask;
        }
    }

    pub fn total_spikes(&self) -> u64 {
        self.bits.iter().map(|b| b.count_ones() as u64).sum()
    }

    /// Copies frames `[start, start + len)` into a new stream whose origin is
    /// shifted accordingly.
    pub fn sub_stream(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start.checked_add(len).is_none_or(|end| end > self.length) {
            return Err(Error::Bounds(format!(
                "frames {start}..{} outside stream of length {}",
                start.saturating_add(len),
                self.length
            )));
        }
        let fb = self.frame_bytes();
        Ok(Self {
            height: self.height,
            width: self.width,
            length: len,
            origin_tick: self.origin_tick + start as u64,
            bits: self.bits[start * fb..(start + len) * fb].to_vec(),
        })
    }

    /// `count` contiguous windows of `window_len` ticks, starting at the origin.
    ///
    /// Window `i` covers relative frames `i·L .. i·L + L − 1` and is centred on
    /// `origin + i·L + (L − 1)/2`.
    pub fn windows(&self, count: usize, window_len: usize) -> Result<Vec<SpikeWindow<'_>>> {
        if window_len.is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "window length must be odd, got {window_len}"
            )));
        }
        if count == 0 {
            return Err(Error::Argument("window count must be positive".into()));
        }
        let needed = count.saturating_mul(window_len);
        if needed > self.length {
            return Err(Error::Bounds(format!(
                "{count} windows of {window_len} ticks need {needed} frames, stream has {}",
                self.length
            )));
        }
        let delta_t = window_len / 2;
        (0..count)
            .map(|i| slice_window(self, window_center(self.origin_tick, i, window_len), delta_t))
            .collect()
    }

    fn check_padding(&self) -> Result<()> {
        let used = self.pixels() % 8;
        if used == 0 {
            return Ok(());
        }
        let mask = !((1u8 << used) - 1);
        let fb = self.frame_bytes();
        for n in 0..self.length {
            if self.bits[(n + 1) * fb - 1] & mask != 0 {
                return Err(Error::Corrupt(format!("nonzero padding bits in frame {n}")));
            }
        }
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io_at(path, e))?;
        let mut reader = BufReader::new(file);
        let stream = decode_stream(&mut reader)?;
        let mut extra = [0u8; 1];
        if reader.read(&mut extra).map_err(|e| Error::io_at(path, e))? != 0 {
            return Err(Error::Format(format!(
                "{}: trailing bytes after payload",
                path.display()
            )));
        }
        Ok(stream)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<u64> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io_at(path, e))?;
        let mut w = BufWriter::new(file);
        let n = encode_stream(self, &mut w)?;
        w.flush().map_err(|e| Error::io_at(path, e))?;
        Ok(n)
    }
}

/// Absolute centre tick of 0-based window `index`.
pub fn window_center(origin_tick: u64, index: usize, window_len: usize) -> u64 {
    origin_tick + (index * window_len + window_len / 2) as u64
}

/// Writes the `.spk` encoding of `stream` and returns the number of bytes written.
pub fn encode_stream<W: Write>(stream: &SpikeStream, sink: &mut W) -> Result<u64> {
    let dim = |v: usize, name: &str| {
        u32::try_from(v).map_err(|_| Error::Format(format!("{name}={v} does not fit in u32")))
    };
    let h = dim(stream.height, "height")?;
    let w = dim(stream.width, "width")?;
    let n = dim(stream.length, "length")?;

    let mut header = [0u8; SPK_HEADER_LEN];
    header[0..4].copy_from_slice(SPK_MAGIC);
    header[4..6].copy_from_slice(&SPK_VERSION.to_le_bytes());
    header[6..10].copy_from_slice(&h.to_le_bytes());
    header[10..14].copy_from_slice(&w.to_le_bytes());
    header[14..18].copy_from_slice(&n.to_le_bytes());
    header[18..26].copy_from_slice(&stream.origin_tick.to_le_bytes());
    sink.write_all(&header)?;
    sink.write_all(&stream.bits)?;
    Ok((SPK_HEADER_LEN + stream.bits.len()) as u64)
}

pub fn decode_stream<R: Read>(source: &mut R) -> Result<SpikeStream> {
    let mut header = [0u8; SPK_HEADER_LEN];
    read_header(source, &mut header)?;
    if &header[0..4] != SPK_MAGIC {
        return Err(Error::Format("bad magic, expected SPKS".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != SPK_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let u32_at = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap()) as usize;
    let (height, width, length) = (u32_at(6), u32_at(10), u32_at(14));
    let origin_tick = u64::from_le_bytes(header[18..26].try_into().unwrap());
    if height == 0 || width == 0 || length == 0 {
        return Err(Error::Format(format!(
            "zero dimension in header: {height}x{width}x{length}"
        )));
    }
    let payload = height
        .checked_mul(width)
        .map(|p| p.div_ceil(8))
        .and_then(|fb| fb.checked_mul(length))
        .ok_or_else(|| Error::Format("header dims overflow".into()))?;
    if origin_tick.checked_add(length as u64 - 1).is_none() {
        return Err(Error::Format("origin tick overflows".into()));
    }

    // Grows with the data actually present, so a forged header cannot force a
    // huge allocation.
    let mut bits = Vec::new();
    source.take(payload as u64).read_to_end(&mut bits)?;
    if bits.len() != payload {
        return Err(Error::Length {
            expected: payload,
            actual: bits.len(),
        });
    }
    SpikeStream::from_packed(height, width, length, origin_tick, bits)
}

fn read_header<R: Read>(source: &mut R, buf: &mut [u8]) -> Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(Error::Format(format!(
                    "truncated header: {filled} of {} bytes",
                    buf.len()
                )))
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// A view of `2Δt + 1` consecutive frames of a stream.
#[derive(Clone, Copy)]
pub struct SpikeWindow<'a> {
    stream: &'a SpikeStream,
    center_tick: u64,
    delta_t: usize,
}

impl std::fmt::Debug for SpikeWindow<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpikeWindow")
            .field("center_tick", &self.center_tick)
            .field("delta_t", &self.delta_t)
            .field("start_tick", &self.start_tick())
            .field("end_tick", &self.end_tick())
            .finish()
    }
}

/// Zero-copy window of `2·delta_t + 1` frames centred on absolute `center_tick`.
pub fn slice_window(stream: &SpikeStream, center_tick: u64, delta_t: usize) -> Result<SpikeWindow<'_>> {
    let dt = delta_t as u64;
    let in_range = center_tick
        .checked_sub(dt)
        .is_some_and(|start| start >= stream.origin_tick)
        && center_tick
            .checked_add(dt)
            .is_some_and(|end| end <= stream.last_tick());
    if !in_range {
        return Err(Error::Bounds(format!(
            "window {center_tick}±{delta_t} outside stream ticks {}..={}",
            stream.origin_tick,
            stream.last_tick()
        )));
    }
    Ok(SpikeWindow {
        stream,
        center_tick,
        delta_t,
    })
}

impl<'a> SpikeWindow<'a> {
    pub fn stream(&self) -> &'a SpikeStream {
        self.stream
    }

    pub fn height(&self) -> usize {
        self.stream.height
    }

    pub fn width(&self) -> usize {
        self.stream.width
    }

    pub fn pixels(&self) -> usize {
        self.stream.pixels()
    }

    pub fn center_tick(&self) -> u64 {
        self.center_tick
    }

    pub fn delta_t(&self) -> usize {
        self.delta_t
    }

    /// Window length `2Δt + 1`.
    pub fn len(&self) -> usize {
        2 * self.delta_t + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start_tick(&self) -> u64 {
        self.center_tick - self.delta_t as u64
    }

    pub fn end_tick(&self) -> u64 {
        self.center_tick + self.delta_t as u64
    }

    fn first_frame(&self) -> usize {
        (self.start_tick() - self.stream.origin_tick) as usize
    }

    /// Packed frame `j` of the window, `0 ≤ j < len()`.
    pub fn frame(&self, j: usize) -> &'a [u8] {
        assert!(j < self.len(), "frame {j} outside window of {}", self.len());
        self.stream.frame(self.first_frame() + j)
    }

    #[inline]
    pub fn get(&self, j: usize, pixel: usize) -> bool {
        debug_assert!(j < self.len());
        self.stream.get(self.first_frame() + j, pixel)
    }

    /// Copies the window into a standalone stream (origin = window start).
    pub fn to_stream(&self) -> SpikeStream {
        self.stream
            .sub_stream(self.first_frame(), self.len())
            .expect("window lies inside its stream")
    }
}

/// Per-pixel number of spikes in the window, row-major.
pub fn spike_count_map(window: &SpikeWindow<'_>) -> Vec<u32> {
    let pixels = window.pixels();
    let mut counts = vec![0u32; pixels];
    for j in 0..window.len() {
        for (byte_idx, &byte) in window.frame(j).iter().enumerate() {
            let mut b = byte;
            while b != 0 {
                let bit = b.trailing_zeros() as usize;
                counts[byte_idx * 8 + bit] += 1;
                b &= b - 1;
            }
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode_to_vec(s: &SpikeStream) -> Vec<u8> {
        let mut out = Vec::new();
        encode_stream(s, &mut out).unwrap();
        out
    }

    #[test]
    fn one_pixel_payload_is_lsb_first() {
        let spikes = [0, 0, 0, 1, 0, 0, 0, 1];
        let s = SpikeStream::from_fn(1, 1, 8, 0, |n, _, _| spikes[n] == 1).unwrap();
        let bytes = encode_to_vec(&s);
        assert_eq!(bytes.len(), SPK_HEADER_LEN + 8);
        assert_eq!(&bytes[SPK_HEADER_LEN..], &[0, 0, 0, 1, 0, 0, 0, 1]);

        let back = decode_stream(&mut bytes.as_slice()).unwrap();
        let fired: Vec<usize> = (0..8).filter(|&n| back.get(n, 0)).collect();
        assert_eq!(fired, vec![3, 7]);
        assert_eq!(back, s);
    }

    #[test]
    fn empty_2x2_is_one_zero_byte() {
        let s = SpikeStream::zeros(2, 2, 1, 0).unwrap();
        let bytes = encode_to_vec(&s);
        assert_eq!(&bytes[SPK_HEADER_LEN..], &[0x00]);
    }

    #[test]
    fn header_layout() {
        let s = SpikeStream::zeros(3, 5, 2, 0x0102_0304_0506_0708).unwrap();
        let bytes = encode_to_vec(&s);
        assert_eq!(&bytes[0..4], b"SPKS");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..10], &[3, 0, 0, 0]);
        assert_eq!(&bytes[10..14], &[5, 0, 0, 0]);
        assert_eq!(&bytes[14..18], &[2, 0, 0, 0]);
        assert_eq!(&bytes[18..26], &[8, 7, 6, 5, 4, 3, 2, 1]);
        assert_eq!(bytes.len(), SPK_HEADER_LEN + 2 * 2);
    }

    #[test]
    fn truncated_payload_is_length_error() {
        let s = SpikeStream::from_fn(4, 4, 3, 0, |n, y, x| (n + y + x) % 2 == 0).unwrap();
        let bytes = encode_to_vec(&s);
        let err = decode_stream(&mut &bytes[..bytes.len() - 1]).unwrap_err();
        assert!(matches!(err, Error::Length { expected: 6, actual: 5 }), "{err}");
    }

    #[test]
    fn bad_magic_and_version() {
        let s = SpikeStream::zeros(1, 1, 1, 0).unwrap();
        let mut bytes = encode_to_vec(&s);
        bytes[0] = b'X';
        assert!(matches!(decode_stream(&mut bytes.as_slice()), Err(Error::Format(_))));
        let mut bytes = encode_to_vec(&s);
        bytes[4] = 2;
        assert!(matches!(decode_stream(&mut bytes.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn nonzero_padding_is_corruption() {
        let s = SpikeStream::zeros(1, 3, 2, 0).unwrap();
        let mut bytes = encode_to_vec(&s);
        bytes[SPK_HEADER_LEN + 1] = 0b1000_0000;
        assert!(matches!(decode_stream(&mut bytes.as_slice()), Err(Error::Corrupt(_))));
    }

    #[test]
    fn slice_window_uses_absolute_ticks() {
        let s = SpikeStream::zeros(2, 2, 1000, 0).unwrap();
        // Window i = 1 of Δt = 20: centre 41, ticks 21..=61.
        let w = slice_window(&s, 41, 20).unwrap();
        assert_eq!((w.start_tick(), w.end_tick(), w.len()), (21, 61, 41));

        let single = slice_window(&s, 500, 0).unwrap();
        assert_eq!(single.len(), 1);

        let s41 = SpikeStream::zeros(2, 2, 41, 0).unwrap();
        let full = slice_window(&s41, 20, 20).unwrap();
        assert_eq!((full.start_tick(), full.end_tick()), (0, 40));
        assert!(matches!(slice_window(&s41, 19, 20), Err(Error::Bounds(_))));
        assert!(matches!(slice_window(&s41, 21, 20), Err(Error::Bounds(_))));
    }

    #[test]
    fn slice_window_respects_origin() {
        let s = SpikeStream::from_fn(1, 3, 10, 100, |n, _, x| n == x + 4).unwrap();
        let w = slice_window(&s, 105, 1).unwrap();
        for j in 0..w.len() {
            for p in 0..3 {
                assert_eq!(w.get(j, p), s.get(105 - 1 + j - 100, p));
            }
        }
        assert!(slice_window(&s, 100, 1).is_err());
        assert!(slice_window(&s, 101, 1).is_ok());
        assert!(slice_window(&s, 109, 1).is_err());
    }

    #[test]
    fn count_map_extremes() {
        let ones = SpikeStream::from_fn(4, 4, 41, 0, |_, _, _| true).unwrap();
        let w = slice_window(&ones, 20, 20).unwrap();
        assert!(spike_count_map(&w).iter().all(|&c| c == 41));

        let zeros = SpikeStream::zeros(4, 4, 41, 0).unwrap();
        let w = slice_window(&zeros, 20, 20).unwrap();
        assert!(spike_count_map(&w).iter().all(|&c| c == 0));
    }

    #[test]
    fn windows_layout() {
        let s = SpikeStream::zeros(1, 1, 130, 7).unwrap();
        let ws = s.windows(3, 41).unwrap();
        let centers: Vec<u64> = ws.iter().map(|w| w.center_tick()).collect();
        assert_eq!(centers, vec![27, 68, 109]);
        assert_eq!(ws[1].start_tick(), ws[0].end_tick() + 1);
        assert!(s.windows(4, 41).is_err());
        assert!(s.windows(1, 40).is_err());
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(SpikeStream::zeros(0, 1, 1, 0).is_err());
        assert!(SpikeStream::zeros(1, 0, 1, 0).is_err());
        assert!(SpikeStream::zeros(1, 1, 0, 0).is_err());
    }
}
