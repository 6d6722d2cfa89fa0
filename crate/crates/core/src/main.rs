fn main() {
    std::process::exit(dslrepair::cli::run(std::env::args_os()));
}
