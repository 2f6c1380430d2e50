void shift(int n, float *a)
{
    #pragma acc data copy(a[0:n])
    #pragma acc parallel loop present(a[0:n])
    for (int i = 0; i < n; i++) {
        a[i] = a[i] + 1.0f;
    }
}
