//! Boundary unit conversions. Everything inside the crate is SI
//! (J, W, bit/s, s); these helpers are only used where values enter or
//! leave through files, flags and presets.

/// Coulombs per milliamp-hour (1 mAh = 1e-3 A x 3600 s).
pub const COULOMBS_PER_MAH: f64 = 3.6;

pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// Stored energy of a cell in joules.
pub fn mah_volts_to_joules(capacity_mah: f64, voltage_v: f64) -> f64 {
    capacity_mah * voltage_v * COULOMBS_PER_MAH
}

pub fn microwatts(uw: f64) -> f64 {
    uw * 1e-6
}

pub fn milliwatts(mw: f64) -> f64 {
    mw * 1e-3
}

pub fn kbps(k: f64) -> f64 {
    k * 1e3
}

pub fn mbps(m: f64) -> f64 {
    m * 1e6
}

pub fn nanojoules(nj: f64) -> f64 {
    nj * 1e-9
}

pub fn picojoules(pj: f64) -> f64 {
    pj * 1e-12
}

pub fn seconds_to_hours(s: f64) -> f64 {
    s / SECONDS_PER_HOUR
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coin_cell_energy() {
        assert_eq!(mah_volts_to_joules(1000.0, 3.0), 10_800.0);
        assert_eq!(mah_volts_to_joules(200.0, 3.0), 2_160.0);
    }

    #[test]
    fn prefixes() {
        assert!((microwatts(400.0) - 4e-4).abs() < 1e-18);
        assert_eq!(kbps(200.0), 2e5);
        assert_eq!(seconds_to_hours(5.4e6), 1500.0);
    }
}
