#include "malrag/vector_store.hpp"

#include <cstring>
#include <fstream>

#include "malrag/errors.hpp"

namespace malrag {

namespace {

// All integers little-endian. Serialization is byte-order explicit so stores
// written on any host read back identically.

void put_u32(std::ostream& out, std::uint32_t value) {
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_u64(std::ostream& out, std::uint64_t value) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_f32(std::ostream& out, float value) {
    static_assert(sizeof(float) == 4);
    std::uint32_t bits;
    std::memcpy(&bits, &value, 4);
    put_u32(out, bits);
}

void read_exact(std::istream& in, char* buffer, std::size_t n, const char* what) {
    in.read(buffer, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw Error(Stage::Embed, std::string("vector store truncated while reading ") + what);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char bytes[4];
    read_exact(in, reinterpret_cast<char*>(bytes), 4, what);
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return value;
}

std::uint64_t get_u64(std::istream& in, const char* what) {
    unsigned char bytes[8];
    read_exact(in, reinterpret_cast<char*>(bytes), 8, what);
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return value;
}

std::string get_string(std::istream& in, const char* what) {
    std::uint32_t length = get_u32(in, what);
    std::string s(length, '\0');
    if (length > 0) read_exact(in, s.data(), length, what);
    return s;
}

float get_f32(std::istream& in, const char* what) {
    std::uint32_t bits = get_u32(in, what);
    float value;
    std::memcpy(&value, &bits, 4);
    return value;
}

}  // namespace

void write_vector_store(const VectorStoreData& data, std::ostream& out) {
    out.write(kVectorStoreMagic, 4);
    put_u32(out, data.version);
    put_u32(out, data.dimension);
    put_u64(out, data.records.size());
    put_string(out, data.backend_id);
    for (const auto& record : data.records) {
        if (record.vector.size() != data.dimension)
            throw Error(Stage::Embed, "record " + record.chunk_id + " has dimension " +
                                          std::to_string(record.vector.size()) + ", store holds " +
                                          std::to_string(data.dimension));
        put_string(out, record.chunk_id);
        for (float value : record.vector) put_f32(out, value);
    }
    if (!out) throw Error(Stage::Embed, "vector store write failed");
}

void write_vector_store(const VectorStoreData& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Stage::Embed, "cannot open " + path + " for writing");
    write_vector_store(data, out);
}

VectorStoreData read_vector_store(std::istream& in) {
    char magic[4];
    read_exact(in, magic, 4, "magic");
    if (std::memcmp(magic, kVectorStoreMagic, 4) != 0)
        throw Error(Stage::Embed, "bad vector store magic");
    VectorStoreData data;
    data.version = get_u32(in, "version");
    if (data.version != kVectorStoreVersion)
        throw Error(Stage::Embed,
                    "unsupported vector store version " + std::to_string(data.version));
    data.dimension = get_u32(in, "dimension");
    std::uint64_t count = get_u64(in, "count");
    data.backend_id = get_string(in, "backend id");
    data.records.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        EmbeddedChunk record;
        record.chunk_id = get_string(in, "chunk id");
        record.vector.reserve(data.dimension);
        for (std::uint32_t d = 0; d < data.dimension; ++d)
            record.vector.push_back(get_f32(in, "vector"));
        data.records.push_back(std::move(record));
    }
    return data;
}

VectorStoreData read_vector_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Stage::Embed, "cannot open " + path + " for reading");
    return read_vector_store(in);
}

}  // namespace malrag
