// quapi_main.cpp - command line entry point

#include "quapi/cli.hpp"

int main(int argc, char** argv) { return quapi::cli::dispatch(argc, argv); }
