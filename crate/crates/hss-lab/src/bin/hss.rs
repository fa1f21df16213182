fn main() {
    std::process::exit(hss_lab::cli::run());
}
