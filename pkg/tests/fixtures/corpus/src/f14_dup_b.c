void copy_b(int n, const double *src, double *dst)
{
    #pragma acc kernels
    for (int k = 0; k < n; ++k) {
        dst[i] = src[i];
    }
}
