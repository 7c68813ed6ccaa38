#pragma once

#include "vidmeta/metadata.h"

#include <string_view>
#include <vector>

namespace vidmeta {

// Offset of the first `<` in `payload` when everything before it is
// whitespace or NUL, or npos when the payload does not look like XML.
std::size_t find_xml_start(std::string_view payload);

// Parses an XML document and returns its elements and attributes as a flat
// list of (local name, text) pairs in document order. Later occurrences of a
// key overwrite earlier ones. Namespace prefixes are stripped and xmlns
// declarations dropped. An element contributes a pair when it carries
// non-whitespace text or has no child elements.
//
// Throws Error(kXmlNotWellFormed) on malformed input.
std::vector<Field> flatten_xml(std::string_view document);

}  // namespace vidmeta
