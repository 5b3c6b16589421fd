// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(mpld::cli::run_cli(std::env::args_os()));
}
