fn main() {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let code = symseek::clock::with_search_stack(move || symseek::cli::run(args));
    std::process::exit(code);
}
