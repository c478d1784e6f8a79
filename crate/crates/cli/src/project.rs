//! Project file access with an exclusive advisory lock held across
//! read-modify-write cycles.

use std::fs::OpenOptions;
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::PathBuf;

use revmeta_core::{Error, Review};

pub struct ProjectStore {
    path: PathBuf,
}

impl ProjectStore {
    pub fn new(path: PathBuf) -> Self {
        Self { path }
    }

    /// Load the review read-only. Forward-compatibility warnings go to
    /// stderr.
    pub fn read(&self) -> Result<Review, Error> {
        let loaded = Review::load(&self.path)?;
        for w in &loaded.warnings {
            eprintln!("warning: {w}");
        }
        Ok(loaded.review)
    }

    /// Read, mutate and persist the review while holding an exclusive
    /// advisory lock on the project file. The `modified` timestamp is
    /// refreshed on success.
    pub fn update<T>(&self, f: impl FnOnce(&mut Review) -> Result<T, Error>) -> Result<T, Error> {
        let mut file = OpenOptions::new().read(true).write(true).open(&self.path)?;
        lock_exclusive(&file)?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        let loaded = Review::from_json(&text)?;
        for w in &loaded.warnings {
            eprintln!("warning: {w}");
        }
        let mut review = loaded.review;
        let value = f(&mut review)?;
        review.touch();
        review.validate()?;
        file.seek(SeekFrom::Start(0))?;
        file.set_len(0)?;
        file.write_all(review.to_json().as_bytes())?;
        // The lock is released when `file` closes.
        Ok(value)
    }
}

#[cfg(unix)]
fn lock_exclusive(file: &std::fs::File) -> Result<(), Error> {
    use std::os::unix::io::AsRawFd;
    let rc = unsafe { libc::flock(file.as_raw_fd(), libc::LOCK_EX) };
    if rc != 0 {
        return Err(Error::Io(std::io::Error::last_os_error()));
    }
    Ok(())
}

#[cfg(not(unix))]
fn lock_exclusive(_file: &std::fs::File) -> Result<(), Error> {
    Ok(())
}
