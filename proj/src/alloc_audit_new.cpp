// Global operator new/delete replacements feeding the heap audit counters.
// Linked into the CLI and the acceptance binary only; library targets stay
// hook-free. Sizes are taken from malloc_usable_size so that unsized
// deletes balance the books.

#include <cstdlib>
#include <malloc.h>
#include <new>

#include "gsa/alloc_audit.hpp"

namespace {

void* audited_alloc(std::size_t size) {
    void* p = std::malloc(size ? size : 1);
    if (!p) throw std::bad_alloc();
    gsa::alloc_audit::record_alloc(malloc_usable_size(p));
    return p;
}

void* audited_alloc_aligned(std::size_t size, std::size_t align) {
    if (align < sizeof(void*)) align = sizeof(void*);
    void* p = nullptr;
    if (posix_memalign(&p, align, size ? size : align) != 0) throw std::bad_alloc();
    gsa::alloc_audit::record_alloc(malloc_usable_size(p));
    return p;
}

void audited_free(void* p) noexcept {
    if (!p) return;
    gsa::alloc_audit::record_free(malloc_usable_size(p));
    std::free(p);
}

struct ActivateHooks {
    ActivateHooks() { gsa::alloc_audit::mark_active(); }
} activate_hooks;

}  // namespace

void* operator new(std::size_t size) { return audited_alloc(size); }
void* operator new[](std::size_t size) { return audited_alloc(size); }
void* operator new(std::size_t size, const std::nothrow_t&) noexcept {
    try {
        return audited_alloc(size);
    } catch (...) {
        return nullptr;
    }
}
void* operator new[](std::size_t size, const std::nothrow_t&) noexcept {
    try {
        return audited_alloc(size);
    } catch (...) {
        return nullptr;
    }
}
void* operator new(std::size_t size, std::align_val_t align) {
    return audited_alloc_aligned(size, static_cast<std::size_t>(align));
}
void* operator new[](std::size_t size, std::align_val_t align) {
    return audited_alloc_aligned(size, static_cast<std::size_t>(align));
}

void operator delete(void* p) noexcept { audited_free(p); }
void operator delete[](void* p) noexcept { audited_free(p); }
void operator delete(void* p, std::size_t) noexcept { audited_free(p); }
void operator delete[](void* p, std::size_t) noexcept { audited_free(p); }
void operator delete(void* p, const std::nothrow_t&) noexcept { audited_free(p); }
void operator delete[](void* p, const std::nothrow_t&) noexcept { audited_free(p); }
void operator delete(void* p, std::align_val_t) noexcept { audited_free(p); }
void operator delete[](void* p, std::align_val_t) noexcept { audited_free(p); }
void operator delete(void* p, std::size_t, std::align_val_t) noexcept {
    audited_free(p);
}
void operator delete[](void* p, std::size_t, std::align_val_t) noexcept {
    audited_free(p);
}
