//! Frame files: binary PPM (P6) colour and PFM (Pf) depth.

use std::fs;
use std::io;
use std::path::Path;

use crate::video::Image;

pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Reads whitespace-separated header tokens, skipping `#` comments.
fn header_tokens(bytes: &[u8], count: usize) -> io::Result<(Vec<String>, usize)> {
    let mut tokens = Vec::with_capacity(count);
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(bad("truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    // Exactly one whitespace byte separates the header from the payload.
    if i >= bytes.len() {
        return Err(bad("missing payload"));
    }
    Ok((tokens, i + 1))
}

pub fn decode_ppm(bytes: &[u8]) -> io::Result<Image> {
    let (tok, off) = header_tokens(bytes, 4)?;
    if tok[0] != "P6" {
        return Err(bad(format!("not a binary PPM: magic {}", tok[0])));
    }
    let num = |s: &str| s.parse::<u32>().map_err(|_| bad(format!("bad header number `{s}`")));
    let (w, h, max) = (num(&tok[1])?, num(&tok[2])?, num(&tok[3])?);
    if max != 255 {
        return Err(bad(format!("unsupported maxval {max}")));
    }
    let n = 3 * w as usize * h as usize;
    let data = bytes.get(off..off + n).ok_or_else(|| bad("truncated pixel data"))?.to_vec();
    Ok(Image { width: w, height: h, data })
}

pub fn write_ppm(path: &Path, img: &Image) -> io::Result<()> {
    fs::write(path, encode_ppm(img))
}

pub fn read_ppm(path: &Path) -> io::Result<Image> {
    decode_ppm(&fs::read(path)?)
}

/// Greyscale PFM, little-endian (scale −1.0), rows stored bottom to top.
pub fn encode_pfm(width: u32, height: u32, depth: &[f32]) -> Vec<u8> {
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    for row in (0..height as usize).rev() {
        let w = width as usize;
        for v in &depth[row * w..(row + 1) * w] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_pfm(bytes: &[u8]) -> io::Result<(u32, u32, Vec<f32>)> {
    let (tok, off) = header_tokens(bytes, 4)?;
    if tok[0] != "Pf" {
        return Err(bad(format!("not a greyscale PFM: magic {}", tok[0])));
    }
    let num = |s: &str| s.parse::<u32>().map_err(|_| bad(format!("bad header number `{s}`")));
    let (w, h) = (num(&tok[1])?, num(&tok[2])?);
    let scale: f64 = tok[3].parse().map_err(|_| bad("bad PFM scale"))?;
    let little = scale < 0.0;
    let n = w as usize * h as usize;
    let payload = bytes.get(off..off + 4 * n).ok_or_else(|| bad("truncated PFM data"))?;
    let mut out = vec![0.0f32; n];
    for (k, chunk) in payload.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        let row = h as usize - 1 - k / w as usize;
        out[row * w as usize + k % w as usize] = v;
    }
    Ok((w, h, out))
}

pub fn frame_name(k: usize) -> String {
    format!("frame_{k:04}.ppm")
}

pub fn depth_name(k: usize) -> String {
    format!("depth_{k:04}.pfm")
}

/// Writes `frame_0000.ppm…` (and `depth_0000.pfm…` when `depth` is set) into `dir`.
pub fn write_frames(dir: &Path, frames: &[super::Frame], depth: bool) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (k, f) in frames.iter().enumerate() {
        write_ppm(&dir.join(frame_name(k)), &f.image)?;
        if depth {
            fs::write(dir.join(depth_name(k)), encode_pfm(f.image.width, f.image.height, &f.depth))?;
        }
    }
    Ok(())
}

/// Reads consecutive `frame_XXXX.ppm` files starting at 0.
pub fn read_frames(dir: &Path) -> io::Result<Vec<Image>> {
    let mut out = Vec::new();
    loop {
        let p = dir.join(frame_name(out.len()));
        if !p.exists() {
            break;
        }
        out.push(read_ppm(&p)?);
    }
    if out.is_empty() {
        return Err(io::Error::new(io::ErrorKind::NotFound, format!("no frames in {}", dir.display())));
    }
    Ok(out)
}
