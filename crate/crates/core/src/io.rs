//! PNG and binary PGM/PPM reading and writing.
//!
//! Only 8-bit gray and 8-bit RGB rasters are accepted. Alpha channels,
//! palettes, sub-byte and 16-bit depths are reported as unsupported rather
//! than converted.

use std::fs;
use std::io::{Cursor, ErrorKind, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{ColorImage, GrayImage, Image};
use crate::sauvola::BinaryImage;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// On-disk encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Png,
    Pgm,
    Ppm,
}

impl Format {
    /// Picks the format from a file extension (case-insensitive).
    pub fn from_path(path: &Path) -> Option<Format> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(Format::Png),
            "pgm" => Some(Format::Pgm),
            "ppm" => Some(Format::Ppm),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Format::Png => "png",
            Format::Pgm => "pgm",
            Format::Ppm => "ppm",
        }
    }
}

/// Borrowed view of anything that can be written to disk.
#[derive(Clone, Copy, Debug)]
pub enum ImageRef<'a> {
    Gray(&'a GrayImage),
    Color(&'a ColorImage),
    /// Written as gray: foreground 0, background 255.
    Binary(&'a BinaryImage),
}

impl<'a> From<&'a GrayImage> for ImageRef<'a> {
    fn from(img: &'a GrayImage) -> Self {
        ImageRef::Gray(img)
    }
}

impl<'a> From<&'a ColorImage> for ImageRef<'a> {
    fn from(img: &'a ColorImage) -> Self {
        ImageRef::Color(img)
    }
}

impl<'a> From<&'a BinaryImage> for ImageRef<'a> {
    fn from(img: &'a BinaryImage) -> Self {
        ImageRef::Binary(img)
    }
}

impl<'a> From<&'a Image> for ImageRef<'a> {
    fn from(img: &'a Image) -> Self {
        match img {
            Image::Gray(g) => ImageRef::Gray(g),
            Image::Color(c) => ImageRef::Color(c),
        }
    }
}

impl ImageRef<'_> {
    fn kind(&self) -> &'static str {
        match self {
            ImageRef::Gray(_) => "grayscale",
            ImageRef::Color(_) => "color",
            ImageRef::Binary(_) => "binary",
        }
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    decode(&bytes)
}

/// Decodes PNG, P5 or P6 bytes, dispatching on the magic number.
pub fn decode(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(bytes)
    } else {
        Err(Error::UnsupportedFormat(
            "unrecognized magic bytes (expected PNG, P5 or P6)".into(),
        ))
    }
}

/// Writes `img` to `path` atomically: the data goes to a temporary file in
/// the destination directory which is then renamed over `path`. On error the
/// destination is left untouched.
pub fn save_image<'a>(img: impl Into<ImageRef<'a>>, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let bytes = encode(img, format)?;
    write_atomic(path.as_ref(), &bytes)
}

/// Atomic write used by [`save_image`], exposed for sidecar files.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".scorebin-")
        .tempfile_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn encode<'a>(img: impl Into<ImageRef<'a>>, format: Format) -> Result<Vec<u8>> {
    let img = img.into();
    let mismatch = || Error::FormatMismatch {
        image: img.kind(),
        format: format.name(),
    };
    match (format, img) {
        (Format::Pgm, ImageRef::Gray(g)) => Ok(pnm_bytes(b"P5", g.width(), g.height(), g.data())),
        (Format::Pgm, ImageRef::Binary(b)) => {
            Ok(pnm_bytes(b"P5", b.width(), b.height(), &b.to_gray().into_data()))
        }
        (Format::Ppm, ImageRef::Color(c)) => {
            Ok(pnm_bytes(b"P6", c.width(), c.height(), &c.interleaved()))
        }
        (Format::Png, ImageRef::Gray(g)) => {
            png_bytes(g.width(), g.height(), png::ColorType::Grayscale, g.data())
        }
        (Format::Png, ImageRef::Binary(b)) => png_bytes(
            b.width(),
            b.height(),
            png::ColorType::Grayscale,
            &b.to_gray().into_data(),
        ),
        (Format::Png, ImageRef::Color(c)) => {
            png_bytes(c.width(), c.height(), png::ColorType::Rgb, &c.interleaved())
        }
        (Format::Pgm, ImageRef::Color(_)) | (Format::Ppm, _) => Err(mismatch()),
    }
}

fn pnm_bytes(magic: &[u8], width: usize, height: usize, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 32);
    out.extend_from_slice(magic);
    out.extend_from_slice(format!("\n{width} {height}\n255\n").as_bytes());
    out.extend_from_slice(payload);
    out
}

fn png_bytes(width: usize, height: usize, color: png::ColorType, payload: &[u8]) -> Result<Vec<u8>> {
    let (w, h) = match (u32::try_from(width), u32::try_from(height)) {
        (Ok(w), Ok(h)) => (w, h),
        _ => {
            return Err(Error::InvalidParam {
                name: "dimensions",
                reason: format!("{width}x{height} exceeds PNG limits"),
            })
        }
    };
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, w, h);
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(png_encode_err)?;
        writer.write_image_data(payload).map_err(png_encode_err)?;
        writer.finish().map_err(png_encode_err)?;
    }
    Ok(out)
}

fn png_encode_err(e: png::EncodingError) -> Error {
    match e {
        png::EncodingError::IoError(io) => Error::Io(io),
        other => Error::InvalidParam {
            name: "png",
            reason: other.to_string(),
        },
    }
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(png_decode_err)?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    let color = info.color_type;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!(
            "PNG bit depth {:?}; only 8-bit is supported",
            info.bit_depth
        )));
    }
    if !matches!(color, png::ColorType::Grayscale | png::ColorType::Rgb) {
        return Err(Error::UnsupportedFormat(format!(
            "PNG color type {color:?}; only 8-bit gray and RGB are supported"
        )));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::MalformedFile("PNG dimensions overflow".into()))?;
    let mut buf = vec![0; size];
    let frame = reader.next_frame(&mut buf).map_err(png_decode_err)?;
    buf.truncate(frame.buffer_size());
    match color {
        png::ColorType::Grayscale => Ok(Image::Gray(GrayImage::new(width, height, buf)?)),
        _ => Ok(Image::Color(ColorImage::from_interleaved(width, height, &buf)?)),
    }
}

fn png_decode_err(e: png::DecodingError) -> Error {
    match e {
        png::DecodingError::IoError(io) if io.kind() == ErrorKind::UnexpectedEof => {
            Error::MalformedFile("truncated PNG".into())
        }
        png::DecodingError::IoError(io) => Error::Io(io),
        other => Error::MalformedFile(other.to_string()),
    }
}

/// Cursor over a PNM header.
struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedFile(format!("missing or invalid {what} in PNM header")))
    }
}

fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let channels = if bytes[1] == b'5' { 1 } else { 3 };
    let mut header = HeaderReader { bytes, pos: 2 };
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedFile(format!("dimensions {width}x{height}")));
    }
    if maxval == 0 {
        return Err(Error::MalformedFile("maxval 0".into()));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "PNM maxval {maxval}; only 8-bit data is supported"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(header.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::MalformedFile("missing whitespace after maxval".into()));
    }
    let start = header.pos + 1;
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::MalformedFile("dimensions overflow".into()))?;
    let payload = bytes
        .get(start..)
        .and_then(|rest| rest.get(..len))
        .ok_or_else(|| {
            Error::MalformedFile(format!(
                "truncated raster: expected {len} bytes, found {}",
                bytes.len().saturating_sub(start)
            ))
        })?;
    if let Some(&v) = payload.iter().find(|&&v| usize::from(v) > maxval) {
        return Err(Error::MalformedFile(format!("sample {v} exceeds maxval {maxval}")));
    }
    if channels == 1 {
        Ok(Image::Gray(GrayImage::new(width, height, payload.to_vec())?))
    } else {
        Ok(Image::Color(ColorImage::from_interleaved(width, height, payload)?))
    }
}
