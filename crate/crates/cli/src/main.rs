fn main() {
    std::process::exit(wgl_cli::run(std::env::args_os()));
}
