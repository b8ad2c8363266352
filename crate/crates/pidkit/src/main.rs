use std::process::ExitCode;

fn main() -> ExitCode {
    // Die quietly when a consumer like `head` closes the pipe, instead of
    // panicking on the next print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    pidkit::cli::run()
}
