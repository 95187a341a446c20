#pragma once

#include <cstddef>

namespace miniens::text {

// Unicode general-category predicates over the major classes used by the
// cleaning pipeline (tables generated from the UCD, see unicode_categories.cpp).
bool is_punctuation(char32_t cp);  // P*
bool is_symbol(char32_t cp);       // S*
bool is_letter(char32_t cp);       // L*
bool is_number(char32_t cp);       // N*
bool is_separator(char32_t cp);    // Z*

}  // namespace miniens::text
