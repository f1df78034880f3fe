use memtrans_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

const SCENARIO: &str = r#"
name = "ffi"
[device]
geometry = { kind = "interval", length = 1.0, cells = 16 }
contacts = [{ side = "left" }, { side = "right" }]
lambda = 0.3
final_time = 0.2
doping = { kind = "constant", value = 0.5 }
[device.initial]
d = { kind = "linear", value = 0.3, gradient = [0.4, 0.0] }
[boundary]
mode = "equilibrium"
[solver]
dt = 0.02
[output]
directory = "ffi"
"#;

fn last_error() -> String {
    let p = mt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(text: &str) -> Result<*mut MtSimulation, (MtStatus, String)> {
    let text = CString::new(text).unwrap();
    let mut sim = ptr::null_mut();
    match unsafe { mt_simulation_from_toml(text.as_ptr(), ptr::null(), &mut sim) } {
        MtStatus::Ok => Ok(sim),
        s => Err((s, last_error())),
    }
}

#[test]
fn statistics_round_trip() {
    let mut f = 0.0;
    let mut y = 0.0;
    unsafe {
        assert_eq!(mt_fermi_dirac(0.5, 1.3, &mut f), MtStatus::Ok);
        assert_eq!(mt_inverse_fd_half(f, &mut y), MtStatus::Ok);
    }
    assert!((y - 1.3).abs() < 1e-10);
    assert!(mt_last_error().is_null());
}

#[test]
fn domain_errors_carry_a_message() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(mt_inverse_fd_half(-1.0, &mut out), MtStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(mt_fermi_dirac(-3.0, 0.0, &mut out), MtStatus::Domain);
        assert_eq!(mt_blakemore_h(1.0, &mut out), MtStatus::Domain);
        assert_eq!(mt_blakemore_h(0.5, &mut out), MtStatus::Ok);
        assert_eq!(out, 0.0);
        assert_eq!(mt_g_prime(1.0, ptr::null_mut()), MtStatus::NullPointer);
    }
}

#[test]
fn simulation_lifecycle() {
    let sim = load(SCENARIO).unwrap();
    let mut cells = 0usize;
    let mut e0 = 0.0;
    let mut e1 = 0.0;
    let mut t = 0.0;
    let mut steps = 0usize;
    unsafe {
        assert_eq!(mt_simulation_num_cells(sim, &mut cells), MtStatus::Ok);
        assert_eq!(cells, 16);
        assert_eq!(mt_simulation_energy(sim, &mut e0), MtStatus::Ok);
        assert_eq!(mt_simulation_run(sim), MtStatus::Ok);
        assert_eq!(mt_simulation_energy(sim, &mut e1), MtStatus::Ok);
        assert_eq!(mt_simulation_time(sim, &mut t), MtStatus::Ok);
        assert_eq!(mt_simulation_steps(sim, &mut steps), MtStatus::Ok);
    }
    assert!(e1 < e0, "{e0} -> {e1}");
    assert!((t - 0.2).abs() < 1e-12);
    assert!(steps > 0);

    let mut d = vec![0.0; cells];
    let name = CString::new("D").unwrap();
    unsafe {
        assert_eq!(mt_simulation_get_field(sim, name.as_ptr(), d.as_mut_ptr(), cells), MtStatus::Ok);
        assert_eq!(mt_simulation_get_field(sim, name.as_ptr(), d.as_mut_ptr(), cells - 1), MtStatus::BufferSize);
        let bogus = CString::new("q").unwrap();
        assert_eq!(mt_simulation_get_field(sim, bogus.as_ptr(), d.as_mut_ptr(), cells), MtStatus::UnknownField);
    }
    let mean = d.iter().sum::<f64>() / cells as f64;
    assert!((mean - 0.5).abs() < 1e-12);
    unsafe { mt_simulation_free(sim) };
}

#[test]
fn invalid_scenarios_are_config_errors() {
    let (status, msg) = load("name = 1").unwrap_err();
    assert_eq!(status, MtStatus::Config);
    assert!(!msg.is_empty());
    let saturated = SCENARIO.replace("value = 0.3, gradient = [0.4, 0.0]", "value = 1.0, gradient = [0.0, 0.0]");
    let (status, msg) = load(&saturated).unwrap_err();
    assert_eq!(status, MtStatus::Config);
    assert!(msg.contains("A4"), "{msg}");
    unsafe {
        assert_eq!(mt_simulation_run(ptr::null_mut()), MtStatus::NullPointer);
        mt_simulation_free(ptr::null_mut());
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(mt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
