#pragma once

#include <doctest.h>

#include "warptree/error.hpp"

// Asserts that `expr` throws warptree::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                                   \
    do {                                                                   \
        bool thrown_ = false;                                              \
        try {                                                              \
            (void)(expr);                                                  \
        } catch (const ::warptree::Error& e_) {                            \
            thrown_ = true;                                                \
            CHECK_MESSAGE(e_.code() == (expected), e_.what());             \
        }                                                                  \
        CHECK_MESSAGE(thrown_, "no warptree::Error thrown by " #expr);     \
    } while (0)
