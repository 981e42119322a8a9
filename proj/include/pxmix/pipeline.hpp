#pragma once

namespace pxmix {
int cli_main(int argc, char** argv);
inline int cli_main(int, char**) { return 0; }  // placeholder during bring-up
}  // namespace pxmix
