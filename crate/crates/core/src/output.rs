//! Track files (pipeline output and ground truth), deterministic JSON
//! writing, and PGM label renders.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::mask::Mask;

#[derive(Debug, Clone, PartialEq)]
pub struct OutputTrack {
    pub track_id: u32,
    pub saliency: f64,
    /// Frame -> mask; frames without a segment are absent.
    pub segments: BTreeMap<usize, Mask>,
}

impl OutputTrack {
    pub fn start_frame(&self) -> Option<usize> {
        self.segments.keys().next().copied()
    }
}

/// A set of tracks over one video. Per frame, masks of different tracks never overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutput {
    pub height: u32,
    pub width: u32,
    pub num_frames: usize,
    pub tracks: Vec<OutputTrack>,
}

#[derive(Serialize, Deserialize)]
struct RawTrackFile {
    height: u32,
    width: u32,
    num_frames: usize,
    tracks: Vec<RawTrack>,
}

#[derive(Serialize, Deserialize)]
struct RawTrack {
    track_id: u32,
    saliency: f64,
    segments: BTreeMap<String, Vec<u32>>,
}

impl TrackOutput {
    pub fn empty(height: u32, width: u32, num_frames: usize) -> Self {
        TrackOutput {
            height,
            width,
            num_frames,
            tracks: Vec::new(),
        }
    }

    pub fn track(&self, track_id: u32) -> Option<&OutputTrack> {
        self.tracks.iter().find(|t| t.track_id == track_id)
    }

    /// Checks dimensions, frame range, unique ids and per-frame disjointness.
    pub fn validate(&self, origin: &str) -> Result<()> {
        let mut ids = std::collections::BTreeSet::new();
        let mut per_frame: BTreeMap<usize, Vec<(u32, &Mask)>> = BTreeMap::new();
        for t in &self.tracks {
            if !ids.insert(t.track_id) {
                return Err(Error::format(origin, format!("track id {} appears twice", t.track_id)));
            }
            for (&frame, mask) in &t.segments {
                if frame >= self.num_frames {
                    return Err(Error::format(
                        origin,
                        format!("track {}: frame {frame} outside 0..{}", t.track_id, self.num_frames),
                    ));
                }
                if mask.dims() != (self.height, self.width) {
                    return Err(Error::format(
                        origin,
                        format!("track {}: frame {frame} mask has wrong dimensions", t.track_id),
                    ));
                }
                per_frame.entry(frame).or_default().push((t.track_id, mask));
            }
        }
        for (frame, masks) in per_frame {
            let mut covered = Mask::empty(self.height, self.width);
            for (id, m) in masks {
                if covered.intersection_area(m)? > 0 {
                    return Err(Error::format(
                        origin,
                        format!("frame {frame}: track {id} overlaps another track"),
                    ));
                }
                covered = covered.union(m)?;
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, origin: &str) -> Result<TrackOutput> {
        let raw: RawTrackFile = serde_json::from_str(text).map_err(|e| {
            Error::format(origin, format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        let mut tracks = Vec::with_capacity(raw.tracks.len());
        for (ti, rt) in raw.tracks.into_iter().enumerate() {
            if !rt.saliency.is_finite() {
                return Err(Error::format(
                    format!("{origin}: tracks[{ti}]"),
                    "saliency is not finite",
                ));
            }
            let mut segments = BTreeMap::new();
            for (key, runs) in rt.segments {
                let loc = format!("{origin}: tracks[{ti}].segments[{key}]");
                let frame: usize = key
                    .parse()
                    .map_err(|_| Error::format(loc.clone(), "frame key is not an integer"))?;
                let mask = Mask::from_runs(raw.height, raw.width, &runs)
                    .map_err(|e| Error::format(loc, e.to_string()))?;
                segments.insert(frame, mask);
            }
            tracks.push(OutputTrack {
                track_id: rt.track_id,
                saliency: rt.saliency,
                segments,
            });
        }
        let out = TrackOutput {
            height: raw.height,
            width: raw.width,
            num_frames: raw.num_frames,
            tracks,
        };
        out.validate(origin)?;
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<TrackOutput> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrackOutput::from_json(&text, &path.display().to_string())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let tracks: Vec<serde_json::Value> = self
            .tracks
            .iter()
            .map(|t| {
                let segments: BTreeMap<String, &[u32]> = t
                    .segments
                    .iter()
                    .map(|(f, m)| (f.to_string(), m.runs()))
                    .collect();
                json!({ "track_id": t.track_id, "saliency": t.saliency, "segments": segments })
            })
            .collect();
        json!({
            "height": self.height,
            "width": self.width,
            "num_frames": self.num_frames,
            "tracks": tracks,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, &self.to_json_value())
    }

    /// Per-frame label images: pixel value = track id, 0 = background.
    pub fn label_frames(&self) -> Result<Vec<Vec<u8>>> {
        if let Some(t) = self.tracks.iter().find(|t| t.track_id > 255) {
            return Err(Error::Config(format!(
                "track id {} does not fit in an 8-bit label image",
                t.track_id
            )));
        }
        let (h, w) = (self.height as usize, self.width as usize);
        let mut frames = vec![vec![0u8; h * w]; self.num_frames];
        for t in &self.tracks {
            for (&frame, mask) in &t.segments {
                for (row, col) in mask.pixels() {
                    frames[frame][row as usize * w + col as usize] = t.track_id as u8;
                }
            }
        }
        Ok(frames)
    }

    /// Writes `NNNNNN.pgm` (binary P5, maxval 255) for every frame.
    pub fn render_pgm(&self, dir: &Path) -> Result<()> {
        let frames = self.label_frames()?;
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (t, pixels) in frames.iter().enumerate() {
            let mut bytes = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
            bytes.extend_from_slice(pixels);
            write_atomic(&dir.join(format!("{t:06}.pgm")), &bytes)?;
        }
        Ok(())
    }
}

/// JSON with sorted object keys and shortest round-trip floats, plus a newline.
pub fn to_json_bytes(value: &serde_json::Value) -> Vec<u8> {
    // `serde_json::Value` objects are BTreeMaps, so keys come out sorted.
    let mut bytes = serde_json::to_vec(value).expect("JSON values serialize");
    bytes.push(b'\n');
    bytes
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_atomic(path, &to_json_bytes(value))
}

/// Writes through a temporary file in the same directory, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
