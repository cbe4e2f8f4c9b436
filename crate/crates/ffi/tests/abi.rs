use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qsl_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(qsl_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn rtn(alpha: f64, delta: f64) -> *mut QslChannel {
    let mut ch = ptr::null_mut();
    assert_eq!(unsafe { qsl_channel_rtn(alpha, delta, &mut ch) }, QslStatus::Ok);
    assert!(!ch.is_null());
    ch
}

#[test]
fn markovian_point_through_the_abi() {
    let mut ch = ptr::null_mut();
    let st = unsafe { qsl_channel_phase_damping(1.0, 1.0, 3.0, &mut ch) };
    assert_eq!(st, QslStatus::Ok);
    let mut b = QslBound::default();
    assert_eq!(unsafe { qsl_bound(ch, 0.5, 1.0, 1.0, &mut b) }, QslStatus::Ok);
    assert!((b.tau_ml - 0.25).abs() < 1e-9, "{b:?}");
    assert!((b.tau_ml / b.tau_mt - 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(b.tau_qsl, b.tau_ml);

    let mut paper = 0.0;
    let st = unsafe { qsl_bound_closed_form(ch, 0.5, 1.0, 1.0, QslVariant::Paper, &mut paper) };
    assert_eq!(st, QslStatus::Ok);
    assert!((paper - 0.125 / 2f64.sqrt()).abs() < 1e-9);
    unsafe { qsl_channel_free(ch) };
}

#[test]
fn direct_and_tabulated_channels_agree() {
    let (mut direct, mut table) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(qsl_channel_phase_damping(3.5, 1.0, 0.0, &mut direct), QslStatus::Ok);
        assert_eq!(qsl_channel_phase_damping(3.5, 1.0, 5.0, &mut table), QslStatus::Ok);
    }
    for t in [0.3, 1.255, 4.0] {
        let (mut q1, mut r1, mut q2, mut r2) = (0.0, 0.0, 0.0, 0.0);
        unsafe {
            assert_eq!(qsl_channel_coherence(direct, t, &mut q1, &mut r1), QslStatus::Ok);
            assert_eq!(qsl_channel_coherence(table, t, &mut q2, &mut r2), QslStatus::Ok);
        }
        assert!((q1 - q2).abs() <= 1e-12 * q1.abs().max(1e-300));
        assert!((r1 - r2).abs() <= 1e-8 * r1.abs().max(1e-3));
    }
    let mut q = 0.0;
    let st = unsafe { qsl_channel_coherence(table, 6.0, &mut q, ptr::null_mut()) };
    assert_eq!(st, QslStatus::OutOfRange);
    assert!(last_error().contains("outside the tabulated range"));
    unsafe {
        qsl_channel_free(direct);
        qsl_channel_free(table);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut ch = ptr::null_mut();
    assert_eq!(
        unsafe { qsl_channel_rtn(-1.0, 1.0, &mut ch) },
        QslStatus::InvalidParameter
    );
    assert!(ch.is_null());
    assert!(last_error().contains("alpha"), "{}", last_error());

    assert_eq!(
        unsafe { qsl_channel_rtn(1.0, 1.0, ptr::null_mut()) },
        QslStatus::NullPointer
    );
    assert!(last_error().contains("out"));

    let ch = rtn(2.0, 1.0);
    let mut b = QslBound::default();
    assert_eq!(
        unsafe { qsl_bound(ch, 1.5, 0.0, 1.0, &mut b) },
        QslStatus::InvalidParameter
    );
    assert_eq!(
        unsafe { qsl_bound(ch, 0.5, 0.0, -1.0, &mut b) },
        QslStatus::InvalidParameter
    );
    assert_eq!(
        unsafe { qsl_bound(ptr::null(), 0.5, 0.0, 1.0, &mut b) },
        QslStatus::NullPointer
    );
    assert_eq!(
        unsafe { qsl_bound(ch, 0.5, 0.0, 1.0, ptr::null_mut()) },
        QslStatus::NullPointer
    );
    unsafe {
        qsl_channel_free(ch);
        qsl_channel_free(ptr::null_mut());
    }
}

#[test]
fn filter_symmetry_through_the_abi() {
    let ch = rtn(2.0, 1.0);
    let (mut a, mut b) = (QslBound::default(), QslBound::default());
    unsafe {
        assert_eq!(qsl_bound(ch, 0.2, 1.7, 1.0, &mut a), QslStatus::Ok);
        assert_eq!(qsl_bound(ch, 0.8, 1.7, 1.0, &mut b), QslStatus::Ok);
        qsl_channel_free(ch);
    }
    assert!((a.tau_qsl - b.tau_qsl).abs() <= 1e-10 * a.tau_qsl);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("qsl_ffi.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "qsl_version",
        "qsl_last_error_message",
        "qsl_channel_phase_damping",
        "qsl_channel_rtn",
        "qsl_channel_free",
        "qsl_channel_coherence",
        "qsl_bound(",
        "qsl_bound_closed_form",
        "typedef struct QslChannel QslChannel;",
        "QSL_STATUS_INVALID_PARAMETER = 2",
        "QSL_VARIANT_ML = 1",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
    let version = unsafe { CStr::from_ptr(qsl_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "qsl_ffi.h"

int main(void) {
    QslChannel *ch = NULL;
    if (qsl_channel_rtn(0.2, 1.0, &ch) != QSL_STATUS_OK) return 10;
    QslBound b;
    if (qsl_bound(ch, 0.5, 2.0, 1.0, &b) != QSL_STATUS_OK) return 11;
    if (!(b.tau_qsl > 0.0 && b.tau_qsl <= 1.0)) return 12;
    if (fabs(b.tau_ml / b.tau_mt - sqrt(2.0)) > 1e-9) return 13;
    if (qsl_bound(ch, 2.0, 2.0, 1.0, &b) != QSL_STATUS_INVALID_PARAMETER) return 14;
    if (qsl_last_error_message()[0] == '\0') return 15;
    qsl_channel_free(ch);
    printf("%.12e\n", b.tau_qsl);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    // target/<profile>/deps/abi-* -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libqsl_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());

    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("c_smoke");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());
    let build = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .expect("C compiler");
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
}
