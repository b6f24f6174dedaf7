fn main() {
    std::process::exit(vpmn::cli::run(std::env::args_os()));
}
