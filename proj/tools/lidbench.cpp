// SPDX-License-Identifier: Apache-2.0
#include "lidbench/cli.hpp"

int main(int argc, char** argv) { return lidbench::run_cli(argc, argv); }
