use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One-axis camera moves. `Static` holds the camera still.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimpleKind {
    PushIn,
    PullOut,
    TruckLeft,
    TruckRight,
    PedestalUp,
    PedestalDown,
    PanLeft,
    PanRight,
    TiltUp,
    TiltDown,
    Static,
}

impl SimpleKind {
    pub const MOVING: [SimpleKind; 10] = [
        SimpleKind::PushIn,
        SimpleKind::PullOut,
        SimpleKind::TruckLeft,
        SimpleKind::TruckRight,
        SimpleKind::PedestalUp,
        SimpleKind::PedestalDown,
        SimpleKind::PanLeft,
        SimpleKind::PanRight,
        SimpleKind::TiltUp,
        SimpleKind::TiltDown,
    ];

    /// The six pure translations.
    pub const TRANSLATIONS: [SimpleKind; 6] = [
        SimpleKind::PushIn,
        SimpleKind::PullOut,
        SimpleKind::TruckLeft,
        SimpleKind::TruckRight,
        SimpleKind::PedestalUp,
        SimpleKind::PedestalDown,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SimpleKind::PushIn => "push_in",
            SimpleKind::PullOut => "pull_out",
            SimpleKind::TruckLeft => "truck_left",
            SimpleKind::TruckRight => "truck_right",
            SimpleKind::PedestalUp => "pedestal_up",
            SimpleKind::PedestalDown => "pedestal_down",
            SimpleKind::PanLeft => "pan_left",
            SimpleKind::PanRight => "pan_right",
            SimpleKind::TiltUp => "tilt_up",
            SimpleKind::TiltDown => "tilt_down",
            SimpleKind::Static => "static",
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, SimpleKind::PanLeft | SimpleKind::PanRight | SimpleKind::TiltUp | SimpleKind::TiltDown)
    }

    /// Verb phrase after "the camera".
    pub fn verb(self) -> &'static str {
        match self {
            SimpleKind::PushIn => "pushes forward",
            SimpleKind::PullOut => "pulls back",
            SimpleKind::TruckLeft => "trucks left",
            SimpleKind::TruckRight => "trucks right",
            SimpleKind::PedestalUp => "pedestals up",
            SimpleKind::PedestalDown => "pedestals down",
            SimpleKind::PanLeft => "pans left",
            SimpleKind::PanRight => "pans right",
            SimpleKind::TiltUp => "tilts up",
            SimpleKind::TiltDown => "tilts down",
            SimpleKind::Static => "stays still",
        }
    }

    /// Default speed: m/s for translations, deg/s for pans and tilts.
    pub fn default_speed(self) -> f64 {
        match self {
            SimpleKind::PushIn | SimpleKind::PullOut => 1.2,
            SimpleKind::TruckLeft | SimpleKind::TruckRight => 1.0,
            SimpleKind::PedestalUp | SimpleKind::PedestalDown => 0.4,
            SimpleKind::PanLeft | SimpleKind::PanRight => 12.0,
            SimpleKind::TiltUp | SimpleKind::TiltDown => 6.0,
            SimpleKind::Static => 0.0,
        }
    }
}

impl FromStr for SimpleKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        SimpleKind::MOVING
            .iter()
            .chain(std::iter::once(&SimpleKind::Static))
            .find(|k| k.label() == s)
            .copied()
            .ok_or_else(|| format!("unknown simple motion `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MotionKind {
    Simple(SimpleKind),
    Composed(SimpleKind, SimpleKind),
    SeekThenFocus,
    SwitchFocus,
    Orbit,
    HandheldShake,
    DollyZoom,
    ExplosiveShake,
    /// Roll about the view axis; only 90 and 180 degrees are valid.
    RollRotation(u32),
}

impl MotionKind {
    /// Composition pairs used by default: {push in, pull out} × {truck left, truck right}.
    pub const DEFAULT_COMPOSED: [(SimpleKind, SimpleKind); 4] = [
        (SimpleKind::PushIn, SimpleKind::TruckLeft),
        (SimpleKind::PushIn, SimpleKind::TruckRight),
        (SimpleKind::PullOut, SimpleKind::TruckLeft),
        (SimpleKind::PullOut, SimpleKind::TruckRight),
    ];

    /// Every motion row of the taxonomy, in a fixed order.
    pub fn catalogue() -> Vec<MotionKind> {
        let mut v: Vec<MotionKind> = SimpleKind::MOVING.iter().map(|k| MotionKind::Simple(*k)).collect();
        v.extend(Self::DEFAULT_COMPOSED.iter().map(|(a, b)| MotionKind::Composed(*a, *b)));
        v.extend([
            MotionKind::SeekThenFocus,
            MotionKind::SwitchFocus,
            MotionKind::Orbit,
            MotionKind::HandheldShake,
            MotionKind::DollyZoom,
            MotionKind::ExplosiveShake,
            MotionKind::RollRotation(90),
            MotionKind::RollRotation(180),
        ]);
        v
    }

    pub fn is_static(self) -> bool {
        self == MotionKind::Simple(SimpleKind::Static)
    }
}

impl fmt::Display for MotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MotionKind::Simple(k) => f.write_str(k.label()),
            MotionKind::Composed(a, b) => write!(f, "{}+{}", a.label(), b.label()),
            MotionKind::SeekThenFocus => f.write_str("seek_then_focus"),
            MotionKind::SwitchFocus => f.write_str("switch_focus"),
            MotionKind::Orbit => f.write_str("orbit"),
            MotionKind::HandheldShake => f.write_str("handheld_shake"),
            MotionKind::DollyZoom => f.write_str("dolly_zoom"),
            MotionKind::ExplosiveShake => f.write_str("explosive_shake"),
            MotionKind::RollRotation(d) => write!(f, "roll_rotation_{d}"),
        }
    }
}

impl FromStr for MotionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if let Some((a, b)) = s.split_once('+') {
            return Ok(MotionKind::Composed(a.parse()?, b.parse()?));
        }
        if let Some(d) = s.strip_prefix("roll_rotation_") {
            let d: u32 = d.parse().map_err(|_| format!("bad roll angle in `{s}`"))?;
            return Ok(MotionKind::RollRotation(d));
        }
        Ok(match s {
            "seek_then_focus" => MotionKind::SeekThenFocus,
            "switch_focus" => MotionKind::SwitchFocus,
            "orbit" => MotionKind::Orbit,
            "handheld_shake" => MotionKind::HandheldShake,
            "dolly_zoom" => MotionKind::DollyZoom,
            "explosive_shake" => MotionKind::ExplosiveShake,
            other => MotionKind::Simple(other.parse()?),
        })
    }
}

impl Serialize for MotionKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MotionKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
