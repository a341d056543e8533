#include "soctuner/design_space.hpp"

namespace soctuner {

namespace {

constexpr std::string_view kTable1 = R"json(
{
  "parameters": [
    {"name": "HostCore",    "group": "host-core",  "candidates": ["c1", "c2", "c3"]},
    {"name": "L2Bank",      "group": "host-core",  "candidates": [1, 2, 4]},
    {"name": "L2Way",       "group": "host-core",  "candidates": [4, 8, 16]},
    {"name": "L2Capa",      "group": "host-core",  "candidates": [128, 256, 512]},
    {"name": "Tilerow/col", "group": "systolic",   "candidates": [1, 2, 4, 8]},
    {"name": "Meshrow/col", "group": "systolic",   "candidates": [8, 16, 32, 64]},
    {"name": "Dataflow",    "group": "systolic",   "candidates": ["WS", "OS", "BOTH"]},
    {"name": "InputType",   "group": "systolic",   "candidates": [8, 16, 32]},
    {"name": "AccType",     "group": "systolic",   "candidates": [8, 16, 32]},
    {"name": "OutType",     "group": "systolic",   "candidates": [8, 20, 32]},
    {"name": "SpBank",      "group": "memory",     "candidates": [4, 8, 16, 32]},
    {"name": "SpCapa",      "group": "memory",     "candidates": [64, 128, 256, 512]},
    {"name": "AccBank",     "group": "memory",     "candidates": [1, 2, 4, 8]},
    {"name": "AccCapa",     "group": "memory",     "candidates": [64, 128, 256, 512]},
    {"name": "LdQueue",     "group": "controller", "candidates": [2, 4, 8, 16]},
    {"name": "StQueue",     "group": "controller", "candidates": [2, 4, 8, 16]},
    {"name": "ExQueue",     "group": "controller", "candidates": [2, 4, 8, 16]},
    {"name": "LdRes",       "group": "controller", "candidates": [2, 4, 8, 16]},
    {"name": "StRes",       "group": "controller", "candidates": [2, 4, 8, 16]},
    {"name": "ExRes",       "group": "controller", "candidates": [2, 4, 8, 16]},
    {"name": "MemReq",      "group": "rocc",       "candidates": [16, 32, 64]},
    {"name": "DMABus",      "group": "rocc",       "candidates": [32, 64, 128]},
    {"name": "DMABytes",    "group": "rocc",       "candidates": [32, 64, 128]},
    {"name": "TLBSize",     "group": "rocc",       "candidates": [4, 8, 16]}
  ]
}
)json";

}  // namespace

std::string_view table1_document() { return kTable1; }

}  // namespace soctuner
