#include "evmarker/dictionary.hpp"

namespace evm {

// Same codes as data/dict_6x6_16.txt:
//   evmarker gen-dict data/dict_6x6_16.txt --count 16 --size 6 --seed 20211
const MarkerDictionary& builtin_dictionary() {
    static const MarkerDictionary dict("builtin_6x6_16", 6,
                                       {
        0xea7f662a0,
        0xa85134d43,
        0x255df09dc,
        0x961ffd70d,
        0x44bdf3c9e,
        0xdafb7e993,
        0xf40c518f7,
        0x038e19db3,
        0x59e25bd3b,
        0x21a07ac83,
        0x3ea9c5ef7,
        0x229d3edf1,
        0x8e10eeed1,
        0x705d19725,
        0xc0447b8fb,
        0x7a614a985,
                                       });
    return dict;
}

}  // namespace evm
