fn main() {
    std::process::exit(chemalgebra::cli::run(std::env::args_os()));
}
