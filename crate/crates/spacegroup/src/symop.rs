use crate::{Result, SpacegroupError};

/// One symmetry operation in the fractional basis: an integer rotation part
/// and a rational translation stored in twelfths (every conventional-setting
/// translation has denominator dividing 12).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymOp {
    pub rotation: [[i32; 3]; 3],
    /// translation components in units of 1/12, each in 0..12
    pub translation: [i32; 3],
}

impl SymOp {
    pub fn identity() -> Self {
        SymOp { rotation: [[1, 0, 0], [0, 1, 0], [0, 0, 1]], translation: [0, 0, 0] }
    }

    pub fn det(&self) -> i32 {
        let r = &self.rotation;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// `self` after `other`: (R1, t1)(R2, t2) = (R1 R2, R1 t2 + t1), mod 1.
    pub fn compose(&self, other: &SymOp) -> SymOp {
        let mut rotation = [[0i32; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    rotation[i][j] += self.rotation[i][k] * other.rotation[k][j];
                }
            }
        }
        let mut translation = [0i32; 3];
        for i in 0..3 {
            let mut acc = self.translation[i];
            for k in 0..3 {
                acc += self.rotation[i][k] * other.translation[k];
            }
            translation[i] = acc.rem_euclid(12);
        }
        SymOp { rotation, translation }
    }

    /// Group inverse mod 1. Rotation determinant is ±1 so the adjugate over
    /// the determinant stays integral.
    pub fn inverse(&self) -> SymOp {
        let r = &self.rotation;
        let det = self.det();
        debug_assert!(det == 1 || det == -1);
        let mut inv = [[0i32; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                // adjugate: cofactor of (j, i)
                let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                let (c, d) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (r[a][c] * r[b][d] - r[a][d] * r[b][c]) * det;
            }
        }
        let mut translation = [0i32; 3];
        for i in 0..3 {
            let mut acc = 0;
            for k in 0..3 {
                acc -= inv[i][k] * self.translation[k];
            }
            translation[i] = acc.rem_euclid(12);
        }
        SymOp { rotation: inv, translation }
    }

    /// Apply to a fractional coordinate and reduce mod 1.
    pub fn apply(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            let mut acc = self.translation[i] as f64 / 12.0;
            for k in 0..3 {
                acc += self.rotation[i][k] as f64 * x[k];
            }
            out[i] = acc.rem_euclid(1.0);
            if out[i] >= 1.0 {
                out[i] = 0.0;
            }
        }
        out
    }

    /// Parse an "x,y,z"-style triplet such as `-y,x-y,z+1/2`.
    pub fn parse_triplet(s: &str) -> Result<SymOp> {
        let coords: Vec<&str> = s.split(',').collect();
        if coords.len() != 3 {
            return Err(SpacegroupError::BadTable(format!(
                "triplet `{s}` does not have three components"
            )));
        }
        let mut rotation = [[0i32; 3]; 3];
        let mut translation = [0i32; 3];
        for (row, expr) in coords.iter().enumerate() {
            parse_component(expr.trim(), &mut rotation[row], &mut translation[row])
                .map_err(|m| SpacegroupError::BadTable(format!("in `{s}`: {m}")))?;
            translation[row] = translation[row].rem_euclid(12);
        }
        let op = SymOp { rotation, translation };
        let det = op.det();
        if det != 1 && det != -1 {
            return Err(SpacegroupError::BadTable(format!(
                "triplet `{s}` has rotation determinant {det}"
            )));
        }
        Ok(op)
    }

    /// Inverse of [`SymOp::parse_triplet`].
    pub fn to_triplet(&self) -> String {
        let axes = ["x", "y", "z"];
        let mut out = String::new();
        for i in 0..3 {
            if i > 0 {
                out.push(',');
            }
            let mut any = false;
            for k in 0..3 {
                match self.rotation[i][k] {
                    0 => {}
                    1 => {
                        if any {
                            out.push('+');
                        }
                        out.push_str(axes[k]);
                        any = true;
                    }
                    -1 => {
                        out.push('-');
                        out.push_str(axes[k]);
                        any = true;
                    }
                    v => {
                        out.push_str(&format!("{v:+}"));
                        out.push_str(axes[k]);
                        any = true;
                    }
                }
            }
            let t = self.translation[i].rem_euclid(12);
            if t != 0 {
                let g = gcd(t, 12);
                if any {
                    out.push('+');
                }
                out.push_str(&format!("{}/{}", t / g, 12 / g));
            } else if !any {
                out.push('0');
            }
        }
        out
    }
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn parse_component(expr: &str, rot: &mut [i32; 3], trans: &mut i32) -> std::result::Result<(), String> {
    let bytes = expr.as_bytes();
    let mut i = 0;
    let mut sign = 1i32;
    let mut saw_term = false;
    while i < bytes.len() {
        match bytes[i] {
            b'+' => {
                sign = 1;
                i += 1;
            }
            b'-' => {
                sign = -1;
                i += 1;
            }
            b'x' | b'X' => {
                rot[0] += sign;
                sign = 1;
                saw_term = true;
                i += 1;
            }
            b'y' | b'Y' => {
                rot[1] += sign;
                sign = 1;
                saw_term = true;
                i += 1;
            }
            b'z' | b'Z' => {
                rot[2] += sign;
                sign = 1;
                saw_term = true;
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let num: i32 = expr[start..i]
                    .parse()
                    .map_err(|_| format!("bad number in `{expr}`"))?;
                let den: i32 = if i < bytes.len() && bytes[i] == b'/' {
                    i += 1;
                    let dstart = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    expr[dstart..i].parse().map_err(|_| format!("bad denominator in `{expr}`"))?
                } else {
                    1
                };
                if den == 0 || 12 % den != 0 {
                    return Err(format!("denominator {den} does not divide 12 in `{expr}`"));
                }
                *trans += sign * num * (12 / den);
                sign = 1;
                saw_term = true;
            }
            b' ' => i += 1,
            other => return Err(format!("unexpected character `{}` in `{expr}`", other as char)),
        }
    }
    if !saw_term {
        return Err(format!("empty component in `{expr}`"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_identity_and_screw() {
        let id = SymOp::parse_triplet("x,y,z").unwrap();
        assert_eq!(id, SymOp::identity());
        let screw = SymOp::parse_triplet("-y,x,z+1/2").unwrap();
        assert_eq!(screw.rotation, [[0, -1, 0], [1, 0, 0], [0, 0, 1]]);
        assert_eq!(screw.translation, [0, 0, 6]);
    }

    #[test]
    fn triplet_roundtrip() {
        for s in ["x,y,z", "-x,-y,-z", "-y,x-y,z", "x+1/2,-y+3/4,z+2/3", "-x+1/2,-y,z"] {
            let op = SymOp::parse_triplet(s).unwrap();
            let rt = SymOp::parse_triplet(&op.to_triplet()).unwrap();
            assert_eq!(op, rt, "via `{}` -> `{}`", s, op.to_triplet());
        }
    }

    #[test]
    fn inversion_applied_by_hand() {
        let inv = SymOp::parse_triplet("-x,-y,-z").unwrap();
        let img = inv.apply([0.1, 0.2, 0.3]);
        assert!((img[0] - 0.9).abs() < 1e-12);
        assert!((img[1] - 0.8).abs() < 1e-12);
        assert!((img[2] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn compose_and_inverse_are_consistent() {
        let a = SymOp::parse_triplet("-y,x,z+1/2").unwrap();
        let b = SymOp::parse_triplet("x+1/2,y+1/2,z").unwrap();
        let ab = a.compose(&b);
        let back = ab.compose(&ab.inverse());
        assert_eq!(back, SymOp::identity());
        assert_eq!(a.inverse().inverse(), a);
    }

    #[test]
    fn malformed_triplets_rejected() {
        assert!(SymOp::parse_triplet("x,y").is_err());
        assert!(SymOp::parse_triplet("x,y,q").is_err());
        assert!(SymOp::parse_triplet("x+1/5,y,z").is_err());
    }
}
