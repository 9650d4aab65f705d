#include <doctest.h>

#include <string>

#include "eaeval/digest.hpp"
#include "eaeval/errors.hpp"
#include "support/temp_dir.hpp"

using eaeval::sha256_file;
using eaeval::sha256_hex;

TEST_SUITE("digest") {

TEST_CASE("known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("length edge cases around the padding boundary") {
    // 55, 56, and 64 byte messages exercise the one-block/two-block split.
    CHECK(sha256_hex(std::string(55, 'a')) ==
          "9f4390f8d30c2dd92ec9f095b65e2b9ae9b0a925a5258e241c9f1e910f734318");
    CHECK(sha256_hex(std::string(56, 'a')) ==
          "b35439a4ac6f0948b6d6f9e3c6af0f5f590ce20f1bde7090ef7970686ec6738a");
    CHECK(sha256_hex(std::string(64, 'a')) ==
          "ffe054fe7ae0cb6dc65c3af9b61d5209f439851db43d0ba5997337df154668eb");
}

TEST_CASE("file digest matches in-memory digest") {
    testsupport::TempDir dir("digest");
    const auto p = dir.file("blob.bin", "some file content\nwith two lines\n");
    CHECK(sha256_file(p) == sha256_hex("some file content\nwith two lines\n"));
}

TEST_CASE("missing file raises DataError") {
    CHECK_THROWS_AS(sha256_file("/nonexistent/path/nowhere.bin"), eaeval::DataError);
}

}
