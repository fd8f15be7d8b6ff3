/*
 * Copyright 2026 The HiPrompt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hiprompt {

/// Decodes UTF-8 into code points. Malformed bytes decode as U+FFFD.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);

/// Simple (1:1) Unicode case folding for Latin, Greek and Cyrillic scripts.
char32_t casefold(char32_t cp);
std::string casefold(std::string_view text);

/// Lower-cased word tokens; any non-alphanumeric code point is a separator.
/// No stemming and no stopword removal.
std::vector<std::string> tokenize(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

/// Number of whitespace-separated words; used as the prompt token estimate.
std::size_t word_count(std::string_view text);

}  // namespace hiprompt
