#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "malrag/chunk_database.hpp"

namespace malrag {

/// Binary vector store, little-endian:
///   header: magic "MALV", version u32, dimension u32, count u64,
///           backend_id (u32 length + UTF-8 bytes)
///   record: chunk_id (u32 length + UTF-8 bytes), dimension float32 values
struct VectorStoreData {
    std::uint32_t version = 1;
    std::uint32_t dimension = 0;
    std::string backend_id;
    std::vector<EmbeddedChunk> records;
};

inline constexpr char kVectorStoreMagic[4] = {'M', 'A', 'L', 'V'};
inline constexpr std::uint32_t kVectorStoreVersion = 1;

void write_vector_store(const VectorStoreData& data, std::ostream& out);
void write_vector_store(const VectorStoreData& data, const std::string& path);

VectorStoreData read_vector_store(std::istream& in);
VectorStoreData read_vector_store(const std::string& path);

}  // namespace malrag
