#include <cstdio>
int main() { std::puts("dsii cli placeholder"); return 0; }
