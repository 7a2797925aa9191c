//! Physical quantities with declared units.
//!
//! Configuration values are written as `<number> <unit>` (for example
//! `88 m/day`, `2.6e-3 L/h/m2`, `0.0027 Pa.s`). Units are parsed into an SI
//! scale factor plus a dimension vector and checked against the dimension
//! the key expects. Dimensionless keys accept a bare number.

use std::fmt;

/// Exponents of (length, mass, time, temperature).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dim(pub [i8; 4]);

impl Dim {
    pub const NONE: Dim = Dim([0, 0, 0, 0]);
    pub const LENGTH: Dim = Dim([1, 0, 0, 0]);
    pub const MASS: Dim = Dim([0, 1, 0, 0]);
    pub const TIME: Dim = Dim([0, 0, 1, 0]);
    pub const TEMPERATURE: Dim = Dim([0, 0, 0, 1]);
    pub const VELOCITY: Dim = Dim([1, 0, -1, 0]);
    pub const ACCELERATION: Dim = Dim([1, 0, -2, 0]);
    pub const AREA: Dim = Dim([2, 0, 0, 0]);
    pub const PRESSURE: Dim = Dim([-1, 1, -2, 0]);
    pub const DENSITY: Dim = Dim([-3, 1, 0, 0]);
    pub const VISCOSITY: Dim = Dim([-1, 1, -1, 0]);
    pub const RATE: Dim = Dim([0, 0, -1, 0]);
    pub const DIFFUSIVITY: Dim = Dim([2, 0, -1, 0]);
    pub const MASS_FLUX: Dim = Dim([-2, 1, -1, 0]);
    pub const INVERSE_LENGTH: Dim = Dim([-1, 0, 0, 0]);
    pub const AREA_PER_MASS: Dim = Dim([2, -1, 0, 0]);
    pub const ENERGY: Dim = Dim([2, 1, -2, 0]);

    fn mul(self, other: Dim, power: i8) -> Dim {
        let mut out = self.0;
        for (o, e) in out.iter_mut().zip(other.0) {
            *o += e * power;
        }
        Dim(out)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["m", "kg", "s", "K"];
        let mut first = true;
        for (name, e) in names.iter().zip(self.0) {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "·")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        if first {
            write!(f, "dimensionless")?;
        }
        Ok(())
    }
}

pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const SECONDS_PER_HOUR: f64 = 3_600.0;
/// Julian year.
pub const SECONDS_PER_YEAR: f64 = 365.25 * SECONDS_PER_DAY;

fn base_unit(sym: &str) -> Option<(f64, Dim)> {
    let u = match sym {
        "m" => (1.0, Dim::LENGTH),
        "km" => (1e3, Dim::LENGTH),
        "cm" => (1e-2, Dim::LENGTH),
        "mm" => (1e-3, Dim::LENGTH),
        "um" | "µm" => (1e-6, Dim::LENGTH),
        "nm" => (1e-9, Dim::LENGTH),
        "s" | "sec" => (1.0, Dim::TIME),
        "min" => (60.0, Dim::TIME),
        "h" | "hr" | "hour" | "hours" => (SECONDS_PER_HOUR, Dim::TIME),
        "d" | "day" | "days" => (SECONDS_PER_DAY, Dim::TIME),
        "y" | "yr" | "year" | "years" => (SECONDS_PER_YEAR, Dim::TIME),
        "kg" => (1.0, Dim::MASS),
        "g" => (1e-3, Dim::MASS),
        "mg" => (1e-6, Dim::MASS),
        "L" | "l" => (1e-3, Dim([3, 0, 0, 0])),
        "Pa" => (1.0, Dim::PRESSURE),
        "kPa" => (1e3, Dim::PRESSURE),
        "MPa" => (1e6, Dim::PRESSURE),
        "cP" => (1e-3, Dim::VISCOSITY),
        "J" => (1.0, Dim::ENERGY),
        "K" => (1.0, Dim::TEMPERATURE),
        "1" => (1.0, Dim::NONE),
        _ => return None,
    };
    Some(u)
}

/// Parses a unit expression such as `kg/m2/s`, `m^2`, `Pa.s` or `1/day`.
pub fn parse_unit(expr: &str) -> Result<(f64, Dim), String> {
    let expr = expr.trim();
    if expr.is_empty() || expr == "-" {
        return Ok((1.0, Dim::NONE));
    }
    let mut scale = 1.0;
    let mut dim = Dim::NONE;
    let mut sign: i8 = 1;
    let mut token = String::new();
    let mut flush = |token: &mut String, sign: i8| -> Result<(), String> {
        if token.is_empty() {
            return Ok(());
        }
        let split = token
            .find(|c: char| c.is_ascii_digit() || c == '^' || c == '-')
            .filter(|&i| i > 0 || token == "1")
            .unwrap_or(token.len());
        let (sym, pow) = if token == "1" { ("1", "") } else { token.split_at(split) };
        let pow = pow.trim_start_matches('^');
        let power: i8 = if pow.is_empty() {
            1
        } else {
            pow.parse().map_err(|_| format!("bad exponent in unit `{token}`"))?
        };
        let (s, d) = base_unit(sym).ok_or_else(|| format!("unknown unit `{sym}`"))?;
        scale *= s.powi(i32::from(power * sign));
        dim = dim.mul(d, power * sign);
        token.clear();
        Ok(())
    };
    for ch in expr.chars() {
        match ch {
            '/' => {
                flush(&mut token, sign)?;
                sign = -1;
            }
            '*' | '.' | '·' | ' ' => {
                flush(&mut token, sign)?;
            }
            c => token.push(c),
        }
    }
    flush(&mut token, sign)?;
    Ok((scale, dim))
}

/// Parses `<number> [unit]` and converts to SI, checking the dimension.
pub fn parse_quantity(text: &str, expected: Dim) -> Result<f64, String> {
    let text = text.trim();
    let split = text.find(char::is_whitespace).unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| format!("`{text}` does not start with a number"))?;
    let unit = unit.trim();
    if unit.is_empty() && expected != Dim::NONE {
        return Err(format!(
            "`{text}` has no unit; expected a quantity in {expected}"
        ));
    }
    let (scale, dim) = parse_unit(unit)?;
    if dim != expected {
        return Err(format!(
            "`{text}` has dimension {dim}, expected {expected}"
        ));
    }
    Ok(value * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-300)
    }

    #[test]
    fn velocity_per_day() {
        let v = parse_quantity("88 m/day", Dim::VELOCITY).unwrap();
        assert!(close(v, 88.0 / 86_400.0));
    }

    #[test]
    fn surface_rate_constant() {
        // L/h/m2 reduces to a velocity
        let k = parse_quantity("2.6e-3 L/h/m2", Dim::VELOCITY).unwrap();
        assert!(close(k, 2.6e-6 / 3600.0));
    }

    #[test]
    fn compound_units() {
        assert!(close(
            parse_quantity("0.001 kg/m2/s", Dim::MASS_FLUX).unwrap(),
            0.001
        ));
        assert!(close(
            parse_quantity("23 m2/g", Dim::AREA_PER_MASS).unwrap(),
            23_000.0
        ));
        assert!(close(
            parse_quantity("0.0027 Pa.s", Dim::VISCOSITY).unwrap(),
            0.0027
        ));
        assert!(close(parse_quantity("1e-12 m^2", Dim::AREA).unwrap(), 1e-12));
        assert!(close(
            parse_quantity("1200 1/day", Dim::RATE).unwrap(),
            1200.0 / 86_400.0
        ));
        assert!(close(parse_quantity("140 nm", Dim::LENGTH).unwrap(), 1.4e-7));
    }

    #[test]
    fn rejects_unitless_physical_value() {
        let err = parse_quantity("88", Dim::VELOCITY).unwrap_err();
        assert!(err.contains("no unit"), "{err}");
    }

    #[test]
    fn rejects_wrong_dimension() {
        assert!(parse_quantity("3 m", Dim::TIME).is_err());
        assert!(parse_quantity("3 furlongs", Dim::LENGTH).is_err());
    }

    #[test]
    fn dimensionless_accepts_bare_number() {
        assert_eq!(parse_quantity("0.4", Dim::NONE).unwrap(), 0.4);
        assert_eq!(parse_quantity("0.4 -", Dim::NONE).unwrap(), 0.4);
    }
}
