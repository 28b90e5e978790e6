//! Per-frame pose record: `{"R": [9 row-major], "t": [3], "f_px", "cx", "cy", "w", "h"}`.

use serde::{Deserialize, Serialize};

use super::{CameraPose, GeometryError, Intrinsics, Mat3, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    #[serde(rename = "R")]
    pub r: [f64; 9],
    pub t: [f64; 3],
    pub f_px: f64,
    pub cx: f64,
    pub cy: f64,
    pub w: u32,
    pub h: u32,
}

impl PoseRecord {
    pub fn new(pose: &CameraPose, intr: &Intrinsics) -> Self {
        Self {
            r: pose.rotation.to_row_major(),
            t: pose.translation.to_array(),
            f_px: intr.focal_px,
            cx: intr.cx,
            cy: intr.cy,
            w: intr.width,
            h: intr.height,
        }
    }

    pub fn pose(&self) -> Result<CameraPose, GeometryError> {
        CameraPose::new(Mat3::from_row_major(&self.r), Vec3::from_array(self.t))
    }

    pub fn intrinsics(&self) -> Result<Intrinsics, GeometryError> {
        Intrinsics::new(self.f_px, self.cx, self.cy, self.w, self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::look_at;

    #[test]
    fn json_layout_and_round_trip() {
        let pose = look_at(Vec3::new(0.3, 1.7, 2.9), Vec3::new(0.1, 0.2, -4.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let intr = Intrinsics::from_hfov(128, 96, 60.0).unwrap();
        let rec = PoseRecord::new(&pose, &intr);
        let text = serde_json::to_string(&rec).unwrap();
        assert!(text.starts_with("{\"R\":["));
        for key in ["\"t\":", "\"f_px\":", "\"cx\":", "\"cy\":", "\"w\":128", "\"h\":96"] {
            assert!(text.contains(key), "{text}");
        }
        let back: PoseRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.pose().unwrap(), pose);
        assert_eq!(back.intrinsics().unwrap(), intr);
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = r#"{"R":[1,0,0,0,1,0,0,0,1],"t":[0,0,0],"f_px":1,"cx":0,"cy":0,"w":1,"h":1,"x":2}"#;
        assert!(serde_json::from_str::<PoseRecord>(text).is_err());
    }
}
