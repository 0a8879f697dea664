//! CSV plumbing shared by every file the crate reads or writes. Output
//! files may start with a `# manifest=<hash>` line tying them to the run
//! that produced them; readers skip `#` lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Opens a comma-separated file with a header row.
pub fn reader(path: impl AsRef<Path>) -> Result<csv::Reader<File>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Creates a CSV file, writing the manifest tag line first when given.
pub fn writer(path: impl AsRef<Path>, manifest: Option<&str>) -> Result<csv::Writer<BufWriter<File>>> {
    let path = path.as_ref();
    let mut file = BufWriter::new(File::create(path).map_err(|e| io_error(path, e))?);
    if let Some(hash) = manifest {
        writeln!(file, "# manifest={hash}").map_err(|e| io_error(path, e))?;
    }
    Ok(csv::Writer::from_writer(file))
}

pub fn finish<W: Write>(mut w: csv::Writer<W>, path: impl AsRef<Path>) -> Result<()> {
    w.flush().map_err(|e| io_error(path.as_ref(), e))
}

/// The manifest hash recorded on the first line of `path`, if any.
pub fn manifest_tag(path: impl AsRef<Path>) -> Result<Option<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut first = String::new();
    BufReader::new(file)
        .read_line(&mut first)
        .map_err(|e| io_error(path, e))?;
    Ok(first
        .trim_end()
        .strip_prefix("# manifest=")
        .map(str::to_string))
}
