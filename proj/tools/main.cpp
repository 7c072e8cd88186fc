#include "app/commands.hpp"

int main(int argc, char** argv) { return vlcli::run_cli(argc, argv); }
