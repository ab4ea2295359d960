#include "workbench.hpp"

int main(int argc, char** argv) {
  return febench::workbench::cli_main(argc, argv, febench::workbench::process_env());
}
