fn main() {
    std::process::exit(meso_metrology::cli::main_entry());
}
