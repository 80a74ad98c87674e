//! Shared helpers for integration tests: scripted git repositories and the
//! three-repo fixture corpus.
#![allow(dead_code)] // not every test target uses every helper

use std::path::{Path, PathBuf};
use std::process::Command;

use satd_miner::cluster::ClusteringConfig;
use satd_miner::corpus::FilterConfig;
use satd_miner::pipeline::PipelineConfig;

pub const ALPHA_CMAKELISTS: &str = "\
cmake_minimum_required(VERSION 3.16)
project(alpha LANGUAGES CXX)
# default build configuration for alpha
set(ALPHA_LEVEL 2)
# TODO work around broken AIX linker quirk
set(ALPHA_LINK_MODE static)
add_library(alpha src/alpha.cpp)
# HACK temporary shim until upstream release lands
set(ALPHA_SHIM ON)
install(TARGETS alpha DESTINATION lib)
";

pub const ALPHA_EXTRA_CMAKE: &str = "\
include(GNUInstallDirs)
# TODO work around broken AIX linker quirk
set(EXTRA_WIDGETS ON)
# helper macros for optional components
macro(alpha_add_widget name)
endmacro()
";

pub const BETA_CONFIGURE_AC: &str = "\
# standard autoconf initialization block
AC_INIT([beta], [1.4])
AM_INIT_AUTOMAKE([foreign])
dnl generated portability scaffolding keep in sync
AC_PROG_CC
# FIXME drop this legacy ICONV workaround someday
AM_ICONV
AC_CONFIG_FILES([Makefile])
# FIXME
AC_OUTPUT
";

pub const BETA_MAKEFILE_AM: &str = "\
bin_PROGRAMS = beta
beta_SOURCES = beta.c
";

pub const GAMMA_POM_XML: &str = "\
<project xmlns=\"http://maven.apache.org/POM/4.0.0\">
  <modelVersion>4.0.0</modelVersion>
  <!-- project coordinates and shared metadata -->
  <groupId>org.example</groupId>
  <artifactId>gamma</artifactId>
  <version>2.0.1</version>
  <!-- FIXME drop this legacy ICONV workaround someday -->
  <properties>
    <maven.compiler.source>11</maven.compiler.source>
  </properties>
  <!-- dependency pins reviewed quarterly -->
  <dependencies>
  </dependencies>
</project>
";

pub fn git(dir: &Path, args: &[&str]) {
    let out = Command::new("git")
        .args(args)
        .current_dir(dir)
        .output()
        .expect("git spawns");
    assert!(
        out.status.success(),
        "git {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Commit the staged tree with a fixed identity and date so commit SHAs are
/// reproducible across runs and machines.
pub fn commit(dir: &Path, name: &str, email: &str, date: &str, message: &str) {
    let out = Command::new("git")
        .args(["commit", "-q", "-m", message])
        .current_dir(dir)
        .env("GIT_AUTHOR_NAME", name)
        .env("GIT_AUTHOR_EMAIL", email)
        .env("GIT_AUTHOR_DATE", date)
        .env("GIT_COMMITTER_NAME", name)
        .env("GIT_COMMITTER_EMAIL", email)
        .env("GIT_COMMITTER_DATE", date)
        .output()
        .expect("git spawns");
    assert!(
        out.status.success(),
        "git commit failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

pub fn head_sha(dir: &Path) -> String {
    let out = Command::new("git")
        .args(["rev-parse", "HEAD"])
        .current_dir(dir)
        .output()
        .expect("git spawns");
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

pub fn write(path: &Path, contents: &str) {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).unwrap();
    }
    std::fs::write(path, contents).unwrap();
}

/// Three toy repositories (CMake, Autotools, Maven) with twelve planted
/// comments: six SATD, of which four form two known clone groups.
pub fn build_fixture_corpus(root: &Path) -> PathBuf {
    let alpha = root.join("repos/alpha");
    let beta = root.join("repos/beta");
    let gamma = root.join("repos/gamma");

    // alpha: CMake project, C++, single author, comment cloned internally.
    write(&alpha.join("CMakeLists.txt"), ALPHA_CMAKELISTS);
    write(&alpha.join("src/alpha.cpp"), "int alpha() { return 2; }\n");
    git(&alpha, &["init", "-q", "-b", "main"]);
    git(&alpha, &["add", "CMakeLists.txt", "src/alpha.cpp"]);
    commit(
        &alpha,
        "Alice Palmer",
        "alice@example.org",
        "2020-01-01T12:00:00 +0000",
        "Add alpha build scripts",
    );
    write(
        &alpha.join("src/alpha.cpp"),
        "int alpha() { return 2; }\nint alpha_helper() { return 3; }\n",
    );
    git(&alpha, &["add", "src/alpha.cpp"]);
    commit(
        &alpha,
        "Alice Palmer",
        "alice@example.org",
        "2020-01-02T12:00:00 +0000",
        "Extend alpha source",
    );
    write(&alpha.join("cmake/extra.cmake"), ALPHA_EXTRA_CMAKE);
    git(&alpha, &["add", "cmake/extra.cmake"]);
    commit(
        &alpha,
        "Alice Palmer",
        "alice@example.org",
        "2020-01-03T12:00:00 +0000",
        "Add optional widget module",
    );

    // beta: Autotools project, C; one member of the cross-tool group.
    write(&beta.join("configure.ac"), BETA_CONFIGURE_AC);
    git(&beta, &["init", "-q", "-b", "main"]);
    git(&beta, &["add", "configure.ac"]);
    commit(
        &beta,
        "Bob Tanaka",
        "bob@example.org",
        "2010-01-01T09:00:00 +0000",
        "Initial autotools scaffolding",
    );
    write(&beta.join("Makefile.am"), BETA_MAKEFILE_AM);
    git(&beta, &["add", "Makefile.am"]);
    commit(
        &beta,
        "Bob Tanaka",
        "bob@example.org",
        "2010-01-02T09:00:00 +0000",
        "Add automake rules",
    );

    // gamma: Maven project, Java; the other member of the cross-tool group.
    write(&gamma.join("pom.xml"), GAMMA_POM_XML);
    git(&gamma, &["init", "-q", "-b", "main"]);
    git(&gamma, &["add", "pom.xml"]);
    commit(
        &gamma,
        "Carol Osei",
        "carol@example.org",
        "2022-01-01T15:00:00 +0000",
        "Publish gamma project descriptor",
    );

    let manifest = root.join("manifest.json");
    let manifest_body = format!(
        r#"[
  {{"repo_id":"demo/alpha","primary_language":"C++","commit_count":120,"issue_count":4,"contributor_count":3,"last_commit_timestamp":1750000000,"is_fork":false,"stars":42,"local_path":{alpha:?}}},
  {{"repo_id":"demo/beta","primary_language":"C","commit_count":310,"issue_count":9,"contributor_count":5,"last_commit_timestamp":1751000000,"is_fork":false,"stars":7,"local_path":{beta:?}}},
  {{"repo_id":"demo/gamma","primary_language":"Java","commit_count":150,"issue_count":2,"contributor_count":4,"last_commit_timestamp":1752000000,"is_fork":false,"stars":10,"local_path":{gamma:?}}}
]
"#,
        alpha = alpha.display().to_string(),
        beta = beta.display().to_string(),
        gamma = gamma.display().to_string(),
    );
    write(&manifest, &manifest_body);
    manifest
}

/// Config matching the fixture corpus: thresholds scaled down to toy size,
/// reference timestamp pinned for reproducibility.
pub fn fixture_config(manifest_path: PathBuf, output_dir: PathBuf) -> PipelineConfig {
    PipelineConfig {
        manifest_path,
        output_dir,
        filter: FilterConfig {
            min_commits: 100,
            min_issues: 1,
            max_commit_age_secs: 365 * 86_400,
            min_contributors: 3,
            min_build_lines: 5,
            min_comment_lines: 2,
            reference_timestamp: 1_767_225_600,
        },
        clustering: ClusteringConfig {
            similarity_gate: 0.8,
            eps: 0.1,
            min_samples: 2,
        },
        context_window: 5,
        seed: 7,
        ..PipelineConfig::default()
    }
}
